#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbsched/rng.hpp"

namespace rbsched {

class NonFiniteLoss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fully connected network: ReLU on hidden layers, identity on the output.
// Batches are column-major: one sample per column.
template <typename Scalar>
class Mlp {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct Gradients {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
    };

    Mlp() = default;
    // Zero weights and biases.
    explicit Mlp(std::vector<int> sizes);
    // Weights ~ N(0, init_std^2), biases zero.
    Mlp(std::vector<int> sizes, double init_std, Rng& rng);

    const std::vector<int>& sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int num_layers() const { return static_cast<int>(weights_.size()); }

    Matrix& weight(int layer) { return weights_.at(layer); }
    const Matrix& weight(int layer) const { return weights_.at(layer); }
    Vector& bias(int layer) { return biases_.at(layer); }
    const Vector& bias(int layer) const { return biases_.at(layer); }

    Vector forward(std::span<const Scalar> x) const;
    Matrix forward_batch(const Matrix& x) const;

    // Sum over the batch of (target_j - Q(x_j)[action_j])^2.
    double loss(const Matrix& x, std::span<const int> actions, std::span<const Scalar> targets) const;

    // Gradient of loss() with respect to every weight and bias. Only the taken
    // action's output carries error.
    Gradients gradients(const Matrix& x, std::span<const int> actions, std::span<const Scalar> targets,
                        double* loss_out = nullptr) const;

    // One plain gradient-descent step on loss(); returns the pre-update loss.
    // Throws NonFiniteLoss when the loss is NaN or infinite.
    double train_step(const Matrix& x, std::span<const int> actions, std::span<const Scalar> targets,
                      double learning_rate);

    void copy_weights_from(const Mlp& other);
    bool same_weights(const Mlp& other) const;

    // Binary checkpoint; see README for the layout.
    void save(std::ostream& os) const;
    static Mlp load(std::istream& is);

private:
    void check_input(Eigen::Index rows) const;

    std::vector<int> sizes_;
    std::vector<Matrix> weights_;  // out x in
    std::vector<Vector> biases_;
};

extern template class Mlp<float>;
extern template class Mlp<double>;

// Index of the largest entry; the lowest index wins ties.
template <typename Derived>
int argmax_lowest(const Eigen::MatrixBase<Derived>& v) {
    int best = 0;
    for (int a = 1; a < v.size(); ++a)
        if (v(a) > v(best)) best = a;
    return best;
}

}  // namespace rbsched
