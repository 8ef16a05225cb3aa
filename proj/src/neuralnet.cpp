#include "dynkin/neuralnet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dynkin {

void groupsort(std::span<double> v, int group_size) {
    if (group_size <= 1) return;
    if (v.size() % group_size != 0)
        throw std::invalid_argument("groupsort: group size must divide the length");
    for (std::size_t k = 0; k < v.size(); k += group_size)
        std::sort(v.begin() + k, v.begin() + k + group_size, std::greater<>());
}

int FeedforwardNet::param_count() const {
    int n = 0;
    for (const Layer& l : layers) n += l.out * l.in + l.out;
    return n;
}

namespace {

void apply_activation(const Layer& layer, std::span<double> z,
                      std::vector<int>* perm) {
    switch (layer.activation) {
        case Activation::Identity:
            if (perm) std::iota(perm->begin(), perm->end(), 0);
            break;
        case Activation::Tanh:
            for (double& v : z) v = std::tanh(v);
            if (perm) std::iota(perm->begin(), perm->end(), 0);
            break;
        case Activation::GroupSort: {
            const int s = layer.group_size;
            if (s <= 0 || layer.out % s != 0)
                throw std::invalid_argument("groupsort: bad group size");
            if (perm) {
                // perm[j] = pre-activation index landing in output slot j
                for (int k = 0; k < layer.out; k += s) {
                    std::iota(perm->begin() + k, perm->begin() + k + s, k);
                    std::sort(perm->begin() + k, perm->begin() + k + s,
                              [&](int a, int b) { return z[a] > z[b]; });
                }
                std::vector<double> tmp(z.begin(), z.end());
                for (int j = 0; j < layer.out; ++j) z[j] = tmp[(*perm)[j]];
            } else {
                groupsort(z, s);
            }
            break;
        }
    }
}

}  // namespace

double FeedforwardNet::forward(double x) const {
    std::vector<double> a{x}, z;
    for (const Layer& l : layers) {
        z.assign(l.out, 0.0);
        for (int i = 0; i < l.out; ++i) {
            double s = l.bias[i];
            for (int j = 0; j < l.in; ++j) s += l.weights[i * l.in + j] * a[j];
            z[i] = s;
        }
        apply_activation(l, z, nullptr);
        a = z;
    }
    return a[0];
}

double FeedforwardNet::forward_with_grad(double x, std::span<double> grad) const {
    const int K = static_cast<int>(layers.size());
    std::vector<std::vector<double>> acts(K + 1);   // acts[k] = input of layer k
    std::vector<std::vector<double>> preact(K);     // z before activation
    std::vector<std::vector<int>> perms(K);
    acts[0] = {x};
    for (int k = 0; k < K; ++k) {
        const Layer& l = layers[k];
        std::vector<double> z(l.out);
        for (int i = 0; i < l.out; ++i) {
            double s = l.bias[i];
            for (int j = 0; j < l.in; ++j) s += l.weights[i * l.in + j] * acts[k][j];
            z[i] = s;
        }
        preact[k] = z;
        perms[k].resize(l.out);
        apply_activation(l, z, &perms[k]);
        acts[k + 1] = std::move(z);
    }
    double out = acts[K][0];

    // Backward pass: delta[k] = d out / d z_k.
    std::vector<double> delta{1.0};
    std::vector<std::size_t> offsets(K);
    {
        std::size_t off = 0;
        for (int k = 0; k < K; ++k) {
            offsets[k] = off;
            off += static_cast<std::size_t>(layers[k].out) * layers[k].in + layers[k].out;
        }
    }
    for (int k = K - 1; k >= 0; --k) {
        const Layer& l = layers[k];
        // d out / d a_k (post-activation) arrives in `delta`; pull it back
        // through the activation to d out / d z_k.
        std::vector<double> dz(l.out, 0.0);
        switch (l.activation) {
            case Activation::Identity:
                dz = delta;
                break;
            case Activation::Tanh:
                for (int i = 0; i < l.out; ++i) {
                    double y = std::tanh(preact[k][i]);
                    dz[i] = delta[i] * (1.0 - y * y);
                }
                break;
            case Activation::GroupSort:
                for (int j = 0; j < l.out; ++j) dz[perms[k][j]] += delta[j];
                break;
        }
        double* gw = grad.data() + offsets[k];
        double* gb = gw + static_cast<std::size_t>(l.out) * l.in;
        for (int i = 0; i < l.out; ++i) {
            for (int j = 0; j < l.in; ++j) gw[i * l.in + j] = dz[i] * acts[k][j];
            gb[i] = dz[i];
        }
        if (k > 0) {
            std::vector<double> prev(l.in, 0.0);
            for (int i = 0; i < l.out; ++i)
                for (int j = 0; j < l.in; ++j)
                    prev[j] += l.weights[i * l.in + j] * dz[i];
            delta = std::move(prev);
        }
    }
    return out;
}

void FeedforwardNet::pack(std::span<double> theta) const {
    std::size_t off = 0;
    for (const Layer& l : layers) {
        std::copy(l.weights.begin(), l.weights.end(), theta.begin() + off);
        off += l.weights.size();
        std::copy(l.bias.begin(), l.bias.end(), theta.begin() + off);
        off += l.bias.size();
    }
}

void FeedforwardNet::unpack(std::span<const double> theta) {
    std::size_t off = 0;
    for (Layer& l : layers) {
        std::copy(theta.begin() + off, theta.begin() + off + l.weights.size(),
                  l.weights.begin());
        off += l.weights.size();
        std::copy(theta.begin() + off, theta.begin() + off + l.bias.size(),
                  l.bias.begin());
        off += l.bias.size();
    }
}

FeedforwardNet make_mlp(int hidden, Activation hidden_activation, std::uint64_t seed,
                        int group_size) {
    FeedforwardNet net;
    Layer l1;
    l1.in = 1;
    l1.out = hidden;
    l1.activation = hidden_activation;
    l1.group_size = hidden_activation == Activation::GroupSort ? group_size : 0;
    Layer l2;
    l2.in = hidden;
    l2.out = 1;
    l2.activation = Activation::Identity;

    std::mt19937_64 rng(seed);
    auto init = [&](Layer& l) {
        double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        l.weights.resize(static_cast<std::size_t>(l.out) * l.in);
        l.bias.resize(l.out);
        for (double& w : l.weights) w = dist(rng);
        for (double& b : l.bias) b = dist(rng);
    };
    init(l1);
    init(l2);
    net.layers = {std::move(l1), std::move(l2)};
    return net;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

namespace {

struct Objective {
    FeedforwardNet* net;
    std::span<const double> xs, ys;
    int P;

    // residuals r_i = net(x_i) - y_i and Jacobian rows d r_i / d theta.
    void residuals(const Eigen::VectorXd& theta, Eigen::VectorXd& r,
                   Eigen::MatrixXd* J) const {
        net->unpack({theta.data(), static_cast<std::size_t>(P)});
        const int n = static_cast<int>(xs.size());
        r.resize(n);
        if (J) J->resize(n, P);
        std::vector<double> g(P);
        for (int i = 0; i < n; ++i) {
            double v;
            if (J) {
                v = net->forward_with_grad(xs[i], g);
                for (int j = 0; j < P; ++j) (*J)(i, j) = g[j];
            } else {
                v = net->forward(xs[i]);
            }
            r(i) = v - ys[i];
        }
    }
};

TrainReport finish(FeedforwardNet& net, const Objective& obj,
                   const Eigen::VectorXd& theta, int iters, bool converged) {
    Eigen::VectorXd r;
    Eigen::VectorXd th = theta;
    obj.residuals(th, r, nullptr);
    TrainReport rep;
    rep.iterations = iters;
    rep.converged = converged;
    rep.mse = r.squaredNorm() / std::max<std::size_t>(obj.xs.size(), 1);
    rep.max_residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    return rep;
}

[[noreturn]] void diverged(FeedforwardNet& net, const Eigen::VectorXd& last_finite,
                           int P) {
    net.unpack({last_finite.data(), static_cast<std::size_t>(P)});
    throw TrainingDiverged("training loss turned non-finite");
}

// Damped Gauss-Newton on beta*SSE + alpha*|theta|^2; with evidence updates
// off and (alpha, beta) = (0, 1) this is plain Levenberg-Marquardt.
TrainReport fit_lm(FeedforwardNet& net, const Objective& obj, const TrainConfig& cfg,
                   bool evidence_updates) {
    const int P = obj.P;
    const int n = static_cast<int>(obj.xs.size());
    Eigen::VectorXd theta(P);
    net.pack({theta.data(), static_cast<std::size_t>(P)});

    double alpha = evidence_updates ? 1e-4 : 0.0;
    double beta = 1.0;
    double mu = cfg.lm_damping_init;

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    obj.residuals(theta, r, &J);
    double ed = r.squaredNorm();
    if (!std::isfinite(ed)) diverged(net, theta, P);
    double loss = beta * ed + alpha * theta.squaredNorm();

    Eigen::VectorXd best_theta = theta;
    double best_sse = ed;

    int it = 0;
    int stalled = 0;
    bool converged = false;
    for (; it < cfg.max_iters; ++it) {
        if (cfg.target_max_resid > 0.0 &&
            r.lpNorm<Eigen::Infinity>() <= cfg.target_max_resid) {
            converged = true;
            break;
        }
        Eigen::VectorXd grad = 2.0 * (beta * J.transpose() * r + alpha * theta);
        if (grad.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
            converged = true;
            break;
        }
        Eigen::MatrixXd JtJ = J.transpose() * J;
        const double loss_before = loss;
        bool accepted = false;
        for (int tries = 0; tries < 50 && !accepted; ++tries) {
            Eigen::MatrixXd H = beta * JtJ;
            H.diagonal().array() += alpha + mu;
            Eigen::VectorXd step = H.ldlt().solve(-0.5 * grad);
            Eigen::VectorXd cand = theta + step;
            Eigen::VectorXd rc;
            obj.residuals(cand, rc, nullptr);
            double edc = rc.squaredNorm();
            if (!std::isfinite(edc)) diverged(net, best_theta, P);
            double lc = beta * edc + alpha * cand.squaredNorm();
            if (lc < loss) {
                theta = cand;
                ed = edc;
                loss = lc;
                mu = std::max(mu / cfg.lm_damping_factor, 1e-15);
                accepted = true;
            } else {
                mu *= cfg.lm_damping_factor;
            }
        }
        if (!accepted) break;
        obj.residuals(theta, r, &J);
        if (ed < best_sse) {
            best_sse = ed;
            best_theta = theta;
        }
        if (loss_before - loss <= cfg.loss_tol * std::max(loss, 1e-300)) {
            if (++stalled >= cfg.stall_iters) {
                ++it;
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
        if (evidence_updates) {
            Eigen::MatrixXd H = beta * (J.transpose() * J);
            H.diagonal().array() += alpha;
            double tr_hinv = H.inverse().trace();
            double gamma = P - alpha * tr_hinv;
            double ew = theta.squaredNorm();
            alpha = ew > 1e-12 ? gamma / (2.0 * ew) : 0.0;
            if (ed > 1e-14 && n > gamma) beta = (n - gamma) / (2.0 * ed);
            loss = beta * ed + alpha * theta.squaredNorm();
        }
    }
    // Return the lowest-SSE iterate ever seen; never worse than the start.
    net.unpack({best_theta.data(), static_cast<std::size_t>(P)});
    return finish(net, obj, best_theta, it, converged);
}

// L-BFGS with strong Wolfe line search on the SSE.
TrainReport fit_lbfgs(FeedforwardNet& net, const Objective& obj,
                      const TrainConfig& cfg) {
    const int P = obj.P;
    Eigen::VectorXd theta(P);
    net.pack({theta.data(), static_cast<std::size_t>(P)});

    auto eval = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
        Eigen::VectorXd r;
        Eigen::MatrixXd J;
        obj.residuals(th, r, &J);
        grad = 2.0 * J.transpose() * r;
        return r.squaredNorm();
    };

    Eigen::VectorXd grad(P);
    double loss = eval(theta, grad);
    if (!std::isfinite(loss)) diverged(net, theta, P);
    Eigen::VectorXd best_theta = theta;
    double best_loss = loss;

    std::vector<Eigen::VectorXd> s_hist, y_hist;
    std::vector<double> rho_hist;

    int it = 0;
    bool converged = false;
    for (; it < cfg.max_iters; ++it) {
        if (grad.lpNorm<Eigen::Infinity>() < cfg.grad_tol) {
            converged = true;
            break;
        }
        // Two-loop recursion.
        Eigen::VectorXd q = grad;
        const int h = static_cast<int>(s_hist.size());
        std::vector<double> a(h);
        for (int k = h - 1; k >= 0; --k) {
            a[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= a[k] * y_hist[k];
        }
        if (h > 0) {
            double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (int k = 0; k < h; ++k) {
            double bk = rho_hist[k] * y_hist[k].dot(q);
            q += (a[k] - bk) * s_hist[k];
        }
        Eigen::VectorXd dir = -q;
        double dg0 = grad.dot(dir);
        if (dg0 >= 0.0) {
            dir = -grad;
            dg0 = grad.dot(dir);
        }

        // Strong Wolfe line search (bracket + zoom).
        double step = 1.0, lo = 0.0, hi = 0.0;
        double f_lo = loss, dg_lo = dg0;
        double f_new = loss;
        Eigen::VectorXd g_new(P), th_new(P);
        bool ok = false, bracketed = false;
        double prev_step = 0.0, prev_f = loss, prev_dg = dg0;
        for (int ls = 0; ls < 30; ++ls) {
            th_new = theta + step * dir;
            f_new = eval(th_new, g_new);
            if (!std::isfinite(f_new)) diverged(net, best_theta, P);
            double dg = g_new.dot(dir);
            if (f_new > loss + cfg.wolfe_c1 * step * dg0 || (ls > 0 && f_new >= prev_f)) {
                lo = prev_step; hi = step; f_lo = prev_f; dg_lo = prev_dg;
                bracketed = true;
                break;
            }
            if (std::abs(dg) <= -cfg.wolfe_c2 * dg0) { ok = true; break; }
            if (dg >= 0.0) {
                lo = step; hi = prev_step; f_lo = f_new; dg_lo = dg;
                bracketed = true;
                break;
            }
            prev_step = step; prev_f = f_new; prev_dg = dg;
            step *= 2.0;
        }
        if (bracketed && !ok) {
            for (int z = 0; z < 30; ++z) {
                step = 0.5 * (lo + hi);
                th_new = theta + step * dir;
                f_new = eval(th_new, g_new);
                if (!std::isfinite(f_new)) diverged(net, best_theta, P);
                double dg = g_new.dot(dir);
                if (f_new > loss + cfg.wolfe_c1 * step * dg0 || f_new >= f_lo) {
                    hi = step;
                } else {
                    if (std::abs(dg) <= -cfg.wolfe_c2 * dg0) { ok = true; break; }
                    if (dg * (hi - lo) >= 0.0) hi = lo;
                    lo = step; f_lo = f_new; dg_lo = dg;
                }
                if (std::abs(hi - lo) < 1e-14) break;
            }
        }
        if (!ok && f_new >= loss) break;  // no acceptable step

        Eigen::VectorXd s = th_new - theta;
        Eigen::VectorXd yv = g_new - grad;
        double sy = s.dot(yv);
        if (sy > 1e-12) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > cfg.lbfgs_memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        theta = th_new;
        grad = g_new;
        loss = f_new;
        if (loss < best_loss) {
            best_loss = loss;
            best_theta = theta;
        }
    }
    net.unpack({best_theta.data(), static_cast<std::size_t>(P)});
    return finish(net, obj, best_theta, it, converged);
}

}  // namespace

TrainReport fit(FeedforwardNet& net, std::span<const double> xs,
                std::span<const double> ys, const TrainConfig& config) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("fit: sample size mismatch or empty");
    Objective obj{&net, xs, ys, net.param_count()};
    switch (config.optimizer) {
        case Optimizer::LM:
            return fit_lm(net, obj, config, false);
        case Optimizer::BR:
            return fit_lm(net, obj, config, !config.br_pin_alpha);
        case Optimizer::LBFGS:
            return fit_lbfgs(net, obj, config);
    }
    throw std::invalid_argument("fit: unknown optimizer");
}

FeedforwardNet lipschitz_project(FeedforwardNet net, double zeta) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        Layer& l = net.layers[k];
        for (int i = 0; i < l.out; ++i) {
            double norm = 0.0;
            if (k == 0) {
                for (int j = 0; j < l.in; ++j) {
                    double w = l.weights[i * l.in + j];
                    norm += w * w;
                }
                norm = std::sqrt(norm);
            } else {
                for (int j = 0; j < l.in; ++j) norm += std::abs(l.weights[i * l.in + j]);
            }
            if (norm > 1.0)
                for (int j = 0; j < l.in; ++j) l.weights[i * l.in + j] /= norm;
            l.bias[i] = std::clamp(l.bias[i], -zeta, zeta);
        }
    }
    return net;
}

}  // namespace dynkin
