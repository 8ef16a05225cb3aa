#ifndef DYNKIN_NEURALNET_HPP
#define DYNKIN_NEURALNET_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dynkin {

enum class Activation { Identity, Tanh, GroupSort };

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> bias;     // out
    Activation activation = Activation::Identity;
    int group_size = 0;           // GroupSort only; must divide `out`
};

/// Sorts each consecutive block of `group_size` entries in decreasing order.
void groupsort(std::span<double> v, int group_size);

/// Small scalar-input, scalar-output feedforward network.
struct FeedforwardNet {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int param_count() const;

    double forward(double x) const;
    /// Forward pass plus the gradient of the output w.r.t. every parameter,
    /// packed layer by layer (weights then bias).
    double forward_with_grad(double x, std::span<double> grad) const;

    void pack(std::span<double> theta) const;
    void unpack(std::span<const double> theta);
};

/// One-hidden-layer net with `hidden` units, seeded uniform init in
/// [-1/sqrt(fan_in), 1/sqrt(fan_in)], identity output.
FeedforwardNet make_mlp(int hidden, Activation hidden_activation, std::uint64_t seed,
                        int group_size = 0);

enum class Optimizer { LM, LBFGS, BR };

struct TrainConfig {
    Optimizer optimizer = Optimizer::LM;
    int max_iters = 500;
    double grad_tol = 1e-8;
    // Stall stop: end the run after stall_iters consecutive accepted steps
    // that each improve the loss by less than a loss_tol fraction. Catches
    // the crawl along the approximation floor that the gradient test misses.
    double loss_tol = 1e-3;
    int stall_iters = 5;
    // Absolute stop: done once every residual is below this (0 disables).
    double target_max_resid = 0.0;
    double lm_damping_init = 1e-3;
    double lm_damping_factor = 10.0;
    int lbfgs_memory = 10;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    // Pin the BR regularization weight to zero (then BR == LM).
    bool br_pin_alpha = false;
};

struct TrainReport {
    double mse = 0.0;
    int iterations = 0;
    bool converged = false;
    double max_residual = 0.0;  // max |net(x_i) - y_i| over the samples
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares fit of the net to (xs, ys); the returned parameters never
/// have larger loss than the initial ones. Throws TrainingDiverged (with the
/// last finite iterate restored into `net`) if the loss turns non-finite.
TrainReport fit(FeedforwardNet& net, std::span<const double> xs,
                std::span<const double> ys, const TrainConfig& config);

/// Rescales weight matrices to the GroupSort norm bounds (first layer
/// row-wise 2-norm <= 1, later layers row-wise 1-norm <= 1) and clips biases
/// to [-zeta, zeta]; the result is 1-Lipschitz.
FeedforwardNet lipschitz_project(FeedforwardNet net, double zeta);

/// splitmix64-style mix used to derive per-(level, node) training seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace dynkin

#endif
