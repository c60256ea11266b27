#include "rbsched/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace rbsched {

namespace {

constexpr char kMagic[4] = {'R', 'B', 'Q', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw std::runtime_error("truncated network checkpoint");
    return value;
}

}  // namespace

template <typename Scalar>
Mlp<Scalar>::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("network needs at least input and output sizes");
    for (int s : sizes_)
        if (s < 1) throw std::invalid_argument("layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weights_.push_back(Matrix::Zero(sizes_[l + 1], sizes_[l]));
        biases_.push_back(Vector::Zero(sizes_[l + 1]));
    }
}

template <typename Scalar>
Mlp<Scalar>::Mlp(std::vector<int> sizes, double init_std, Rng& rng) : Mlp(std::move(sizes)) {
    std::normal_distribution<double> normal(0.0, init_std);
    for (auto& w : weights_)
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>(normal(rng));
}

template <typename Scalar>
void Mlp<Scalar>::check_input(Eigen::Index rows) const {
    if (rows != input_dim())
        throw std::invalid_argument("input has dimension " + std::to_string(rows) + ", network expects " +
                                    std::to_string(input_dim()));
}

template <typename Scalar>
typename Mlp<Scalar>::Vector Mlp<Scalar>::forward(std::span<const Scalar> x) const {
    check_input(static_cast<Eigen::Index>(x.size()));
    Vector a = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    for (int l = 0; l < num_layers(); ++l) {
        Vector z = weights_[l] * a + biases_[l];
        if (l + 1 < num_layers()) z = z.cwiseMax(Scalar(0));
        a = std::move(z);
    }
    return a;
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward_batch(const Matrix& x) const {
    check_input(x.rows());
    Matrix a = x;
    for (int l = 0; l < num_layers(); ++l) {
        Matrix z = weights_[l] * a;
        z.colwise() += biases_[l];
        if (l + 1 < num_layers()) z = z.cwiseMax(Scalar(0));
        a = std::move(z);
    }
    return a;
}

template <typename Scalar>
double Mlp<Scalar>::loss(const Matrix& x, std::span<const int> actions, std::span<const Scalar> targets) const {
    const Matrix q = forward_batch(x);
    double total = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double e = static_cast<double>(targets[j]) - static_cast<double>(q(actions[j], j));
        total += e * e;
    }
    return total;
}

template <typename Scalar>
typename Mlp<Scalar>::Gradients Mlp<Scalar>::gradients(const Matrix& x, std::span<const int> actions,
                                                       std::span<const Scalar> targets, double* loss_out) const {
    check_input(x.rows());
    const Eigen::Index batch = x.cols();
    if (static_cast<Eigen::Index>(actions.size()) != batch || static_cast<Eigen::Index>(targets.size()) != batch)
        throw std::invalid_argument("actions/targets must match the batch size");

    const int layers = num_layers();
    std::vector<Matrix> act(layers + 1);  // act[0] = input, act[l+1] = output of layer l
    act[0] = x;
    for (int l = 0; l < layers; ++l) {
        Matrix z = weights_[l] * act[l];
        z.colwise() += biases_[l];
        if (l + 1 < layers) z = z.cwiseMax(Scalar(0));
        act[l + 1] = std::move(z);
    }

    Matrix delta = Matrix::Zero(output_dim(), batch);
    double total = 0.0;
    for (Eigen::Index j = 0; j < batch; ++j) {
        const int a = actions[j];
        if (a < 0 || a >= output_dim()) throw std::out_of_range("action index outside network output");
        const Scalar err = act[layers](a, j) - targets[j];
        total += static_cast<double>(err) * static_cast<double>(err);
        delta(a, j) = Scalar(2) * err;
    }
    if (loss_out) *loss_out = total;

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    for (int l = layers - 1; l >= 0; --l) {
        g.weights[l].noalias() = delta * act[l].transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            Matrix back = weights_[l].transpose() * delta;
            // ReLU derivative from the stored post-activation
            delta = back.cwiseProduct((act[l].array() > Scalar(0)).template cast<Scalar>().matrix());
        }
    }
    return g;
}

template <typename Scalar>
double Mlp<Scalar>::train_step(const Matrix& x, std::span<const int> actions, std::span<const Scalar> targets,
                               double learning_rate) {
    double total = 0.0;
    Gradients g = gradients(x, actions, targets, &total);
    if (!std::isfinite(total)) {
        std::ostringstream msg;
        msg << "non-finite training loss (" << total << ") on a batch of " << x.cols() << " samples";
        throw NonFiniteLoss(msg.str());
    }
    const auto lr = static_cast<Scalar>(learning_rate);
    for (int l = 0; l < num_layers(); ++l) {
        weights_[l].noalias() -= lr * g.weights[l];
        biases_[l].noalias() -= lr * g.biases[l];
    }
    return total;
}

template <typename Scalar>
void Mlp<Scalar>::copy_weights_from(const Mlp& other) {
    if (other.sizes_ != sizes_) throw std::invalid_argument("cannot copy weights between different shapes");
    weights_ = other.weights_;
    biases_ = other.biases_;
}

template <typename Scalar>
bool Mlp<Scalar>::same_weights(const Mlp& other) const {
    if (other.sizes_ != sizes_) return false;
    for (int l = 0; l < num_layers(); ++l) {
        if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
    }
    return true;
}

template <typename Scalar>
void Mlp<Scalar>::save(std::ostream& os) const {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, sizeof(Scalar));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(sizes_.size()));
    for (int s : sizes_) put<std::uint32_t>(os, static_cast<std::uint32_t>(s));
    for (int l = 0; l < num_layers(); ++l) {
        const auto& w = weights_[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) put<Scalar>(os, w(r, c));
        for (Eigen::Index r = 0; r < biases_[l].size(); ++r) put<Scalar>(os, biases_[l](r));
    }
}

template <typename Scalar>
Mlp<Scalar> Mlp<Scalar>::load(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("not a network checkpoint");
    if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("unsupported checkpoint version");
    if (get<std::uint32_t>(is) != sizeof(Scalar)) throw std::runtime_error("checkpoint scalar width mismatch");
    const auto count = get<std::uint32_t>(is);
    if (count < 2 || count > 64) throw std::runtime_error("implausible layer count in checkpoint");
    std::vector<int> sizes(count);
    for (auto& s : sizes) s = static_cast<int>(get<std::uint32_t>(is));
    Mlp net(sizes);
    for (int l = 0; l < net.num_layers(); ++l) {
        auto& w = net.weights_[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = get<Scalar>(is);
        for (Eigen::Index r = 0; r < net.biases_[l].size(); ++r) net.biases_[l](r) = get<Scalar>(is);
    }
    return net;
}

template class Mlp<float>;
template class Mlp<double>;

}  // namespace rbsched
