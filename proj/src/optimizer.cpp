#include "netlocal/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <Eigen/Dense>

#include "contraction.hpp"
#include "netlocal/errors.hpp"
#include "netlocal/rng.hpp"
#include "symmetry.hpp"

namespace netlocal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Euclidean projection of one block onto {p_i >= 0, sum p_i <= 1}. If
// clipping negatives already satisfies the sum constraint it is the
// projection; otherwise the sum constraint is active and the block is
// projected onto the unit simplex (sort-and-threshold pivot).
void project_block(double* x, int len) {
    if (len == 0) return;
    double clipped_sum = 0.0;
    for (int i = 0; i < len; ++i) clipped_sum += std::max(x[i], 0.0);
    if (clipped_sum <= 1.0) {
        for (int i = 0; i < len; ++i) x[i] = std::max(x[i], 0.0);
        return;
    }

    std::vector<double> sorted(x, x + len);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double running = 0.0;
    double theta = 0.0;
    for (int k = 0; k < len; ++k) {
        running += sorted[k];
        const double candidate = (running - 1.0) / (k + 1);
        if (sorted[k] - candidate <= 0.0) break;
        theta = candidate;
    }
    for (int i = 0; i < len; ++i) x[i] = std::max(x[i] - theta, 0.0);

    // land exactly inside the constraint so reprojection is the identity
    for (int pass = 0; pass < 4; ++pass) {
        double sum = 0.0;
        for (int i = 0; i < len; ++i) sum += x[i];
        if (sum <= 1.0) break;
        int argmax = 0;
        for (int i = 1; i < len; ++i) {
            if (x[i] > x[argmax]) argmax = i;
        }
        x[argmax] -= sum - 1.0;
    }
}

// Cost, gradient, and damped Gauss-Newton machinery for one
// (layout, target) pair. Owns all scratch; reentrant across instances.
class Evaluator {
public:
    Evaluator(const ParameterLayout& layout, const Behaviour& target)
        : layout_(layout), plan_(layout.topology, layout.cardinalities) {
        if (target.outputs != layout.topology.outputs ||
            target.inputs != layout.topology.inputs) {
            throw StructuralError("fit: target behaviour shape does not match the topology");
        }
        n_entries_ = plan_.n_outputs * plan_.n_inputs;
        if (target.data.size() != n_entries_) {
            throw StructuralError("fit: target behaviour data size does not match its shape");
        }
        target_ = target.data;

        full_.resize(plan_.full_size());
        source_ptrs_.resize(plan_.n_sources);
        response_ptrs_.resize(plan_.n_parties);
        for (int s = 0; s < plan_.n_sources; ++s) {
            source_ptrs_[s] = full_.data() + plan_.source_offset(s);
        }
        for (int p = 0; p < plan_.n_parties; ++p) {
            response_ptrs_[p] = full_.data() + plan_.response_offset(p);
        }

        n_free_ = layout.total_stored;
        stored_coord_.resize(n_free_);
        last_coord_.resize(n_free_);
        for (const auto& block : layout.blocks) {
            for (int i = 0; i < block.stored_length; ++i) {
                const std::size_t free_idx = block.offset + static_cast<std::size_t>(i);
                stored_coord_[free_idx] = full_coord(block, i);
                last_coord_[free_idx] = full_coord(block, block.full_length - 1);
            }
        }

        table_.resize(n_entries_);
        residual_.resize(n_entries_);
        jac_.resize(n_entries_ * plan_.full_size());
        grad_full_.resize(plan_.full_size());
    }

    std::size_t n_entries() const { return n_entries_; }
    std::size_t n_free() const { return n_free_; }

    double cost_only(const ParameterVector& v) {
        unpack(v);
        detail::contract(plan_, source_ptrs_.data(), response_ptrs_.data(), table_.data());
        double c = 0.0;
        for (std::size_t k = 0; k < n_entries_; ++k) {
            const double r = table_[k] - target_[k];
            c += r * r;
        }
        return c;
    }

    // One Jacobian pass: cost, residuals, and the free-coordinate gradient.
    double cost_and_gradient(const ParameterVector& v, ParameterVector& grad) {
        unpack(v);
        detail::contraction_jacobian(plan_, source_ptrs_.data(), response_ptrs_.data(),
                                     jac_.data(), table_.data());
        double c = 0.0;
        for (std::size_t k = 0; k < n_entries_; ++k) {
            residual_[k] = table_[k] - target_[k];
            c += residual_[k] * residual_[k];
        }
        std::fill(grad_full_.begin(), grad_full_.end(), 0.0);
        const std::size_t full = plan_.full_size();
        for (std::size_t k = 0; k < n_entries_; ++k) {
            const double r2 = 2.0 * residual_[k];
            if (r2 == 0.0) continue;
            const double* row = jac_.data() + k * full;
            for (std::size_t u = 0; u < full; ++u) grad_full_[u] += r2 * row[u];
        }
        grad.resize(n_free_);
        for (std::size_t i = 0; i < n_free_; ++i) {
            grad[i] = grad_full_[stored_coord_[i]] - grad_full_[last_coord_[i]];
        }
        return c;
    }

    // Damped Gauss-Newton step from the Jacobian of the last
    // cost_and_gradient call: d = -J^T (J J^T + lambda I)^{-1} r.
    void gauss_newton_step(double lambda, ParameterVector& step) {
        build_free_jacobian();
        solve_damped(lambda, step);
    }

    // Same, restricted to the face of the constraint set identified at x:
    // coordinates pinned at 0 by the gradient keep d_i = 0 (column dropped),
    // and blocks with an active sum constraint keep sum d_i = 0 (the block's
    // largest coordinate is eliminated by folding its column into the
    // others). Clipped full steps stall at boundary optima; steps along the
    // optimal face restore fast local convergence there.
    bool gauss_newton_step_active(double lambda, const ParameterVector& x,
                                  const ParameterVector& grad, ParameterVector& step) {
        constexpr double eps_active = 1e-9;
        build_free_jacobian();
        bool any_active = false;

        std::vector<bool> frozen(n_free_, false);
        for (std::size_t i = 0; i < n_free_; ++i) {
            if (x[i] <= eps_active && grad[i] >= 0.0) {
                frozen[i] = true;
                any_active = true;
            }
        }
        for (const auto& block : layout_.blocks) {
            if (block.stored_length == 0) continue;
            double sum = 0.0;
            for (int i = 0; i < block.stored_length; ++i) {
                sum += x[block.offset + static_cast<std::size_t>(i)];
            }
            if (sum < 1.0 - eps_active) continue;
            // pivot: largest unfrozen coordinate of the block
            std::size_t pivot = n_free_;
            double pivot_value = -1.0;
            for (int i = 0; i < block.stored_length; ++i) {
                const std::size_t idx = block.offset + static_cast<std::size_t>(i);
                if (!frozen[idx] && x[idx] > pivot_value) {
                    pivot = idx;
                    pivot_value = x[idx];
                }
            }
            if (pivot == n_free_) continue;
            any_active = true;
            for (int i = 0; i < block.stored_length; ++i) {
                const std::size_t idx = block.offset + static_cast<std::size_t>(i);
                if (idx == pivot || frozen[idx]) continue;
                jac_free_.col(idx) -= jac_free_.col(pivot);
            }
            jac_free_.col(pivot).setZero();
            pivot_of_.push_back({block.offset, static_cast<std::size_t>(block.stored_length),
                                 pivot});
        }
        if (!any_active) {
            pivot_of_.clear();
            return false;
        }
        for (std::size_t i = 0; i < n_free_; ++i) {
            if (frozen[i]) jac_free_.col(i).setZero();
        }

        solve_damped(lambda, step);
        // recover the eliminated pivot moves: sum of block steps stays zero
        for (const auto& [offset, len, pivot] : pivot_of_) {
            double moved = 0.0;
            for (std::size_t i = offset; i < offset + len; ++i) {
                if (i != pivot) moved += step[i];
            }
            step[pivot] = -moved;
        }
        pivot_of_.clear();
        return true;
    }

    double jacobian_row_scale() {
        double t = 0.0;
        for (double x : jac_) t += x * x;
        return t / static_cast<double>(n_entries_);
    }

    // One alternating-least-squares sweep. The behaviour is linear and
    // homogeneous in each source block and each party's full response
    // array, so fixing everything else leaves a convex least-squares
    // problem over a product of simplexes, solved here by projected
    // Barzilai-Borwein descent. Each block solve is monotone in the cost;
    // a sweep makes the large coordinated moves that joint local steps
    // cannot, at roughly the price of one Jacobian pass per block.
    double als_sweep(ParameterVector& x) {
        unpack(x);
        double c = 0.0;
        for (int unit = 0; unit < plan_.n_sources + plan_.n_parties; ++unit) {
            detail::contraction_jacobian(plan_, source_ptrs_.data(), response_ptrs_.data(),
                                         jac_.data(), table_.data());
            const bool is_source = unit < plan_.n_sources;
            const std::size_t offset = is_source
                                           ? plan_.source_offset(unit)
                                           : plan_.response_offset(unit - plan_.n_sources);
            const std::size_t size =
                is_source ? static_cast<std::size_t>(plan_.c[unit])
                          : plan_.response_size[unit - plan_.n_sources];
            const std::size_t simplex =
                is_source ? size
                          : static_cast<std::size_t>(plan_.m[unit - plan_.n_sources]);
            c = solve_block_ls(offset, size, simplex);
        }
        // write the updated full coordinates back into stored form
        for (const auto& block : layout_.blocks) {
            for (int i = 0; i < block.stored_length; ++i) {
                x[block.offset + static_cast<std::size_t>(i)] =
                    full_[full_coord(block, i)];
            }
        }
        return c;
    }

private:
    // Exact minimization of || J_B e - target ||^2 over the block's product
    // of output simplexes (projected BB descent on a convex QP). `simplex`
    // is the simplex length; response blocks hold `size/simplex` simplexes
    // whose members are strided by size/simplex in the full layout.
    double solve_block_ls(std::size_t offset, std::size_t size, std::size_t simplex) {
        const std::size_t n_groups = size / simplex;
        const std::size_t stride = n_groups;  // [o][j][h]: o is the slow axis
        auto project = [&](std::vector<double>& e) {
            std::vector<double> group(simplex);
            for (std::size_t g = 0; g < n_groups; ++g) {
                for (std::size_t o = 0; o < simplex; ++o) group[o] = e[g + o * stride];
                project_simplex_eq(group);
                for (std::size_t o = 0; o < simplex; ++o) e[g + o * stride] = group[o];
            }
        };

        std::vector<double> e(size), g(size), endpoint(size), trial(size),
            trial_grad(size);
        for (std::size_t i = 0; i < size; ++i) e[i] = full_[offset + i];
        project(e);

        auto eval = [&](const std::vector<double>& point, std::vector<double>& grad) {
            double c = 0.0;
            std::fill(grad.begin(), grad.end(), 0.0);
            const std::size_t full = plan_.full_size();
            for (std::size_t k = 0; k < n_entries_; ++k) {
                const double* row = jac_.data() + k * full + offset;
                double model = 0.0;
                for (std::size_t i = 0; i < size; ++i) model += row[i] * point[i];
                const double r = model - target_[k];
                c += r * r;
                const double r2 = 2.0 * r;
                for (std::size_t i = 0; i < size; ++i) grad[i] += r2 * row[i];
            }
            return c;
        };

        double c = eval(e, g);
        double bb = 1.0;
        for (int it = 0; it < 60; ++it) {
            double moved = 0.0;
            for (std::size_t i = 0; i < size; ++i) endpoint[i] = e[i] - bb * g[i];
            project(endpoint);
            double descent = 0.0;
            for (std::size_t i = 0; i < size; ++i) {
                const double d = endpoint[i] - e[i];
                descent += g[i] * d;
                moved = std::max(moved, std::abs(d));
            }
            if (moved <= 1e-15 || descent >= 0.0) break;
            double c_t = 0.0;
            bool accepted = false;
            for (double t = 1.0; t >= 0x1p-30; t *= 0.5) {
                for (std::size_t i = 0; i < size; ++i) {
                    trial[i] = e[i] + t * (endpoint[i] - e[i]);
                }
                c_t = eval(trial, trial_grad);
                if (c_t <= c + 1e-4 * t * descent) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
            double sts = 0.0, sty = 0.0;
            for (std::size_t i = 0; i < size; ++i) {
                const double si = trial[i] - e[i];
                sts += si * si;
                sty += si * (trial_grad[i] - g[i]);
            }
            e.swap(trial);
            g.swap(trial_grad);
            c = c_t;
            bb = (sty > 1e-300) ? std::clamp(sts / sty, 1e-8, 1e8) : 1.0;
            if (c <= 1e-30) break;
        }
        for (std::size_t i = 0; i < size; ++i) full_[offset + i] = e[i];
        return c;
    }

    // Euclidean projection onto the unit simplex (equality).
    static void project_simplex_eq(std::vector<double>& y) {
        static thread_local std::vector<double> sorted;
        sorted.assign(y.begin(), y.end());
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        double running = 0.0;
        double theta = 0.0;
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            running += sorted[k];
            const double candidate = (running - 1.0) / static_cast<double>(k + 1);
            if (sorted[k] - candidate <= 0.0) break;
            theta = candidate;
        }
        for (double& v : y) v = std::max(v - theta, 0.0);
    }

    void build_free_jacobian() {
        const std::size_t full = plan_.full_size();
        if (jac_free_.rows() != static_cast<Eigen::Index>(n_entries_) ||
            jac_free_.cols() != static_cast<Eigen::Index>(n_free_)) {
            jac_free_.resize(n_entries_, n_free_);
        }
        for (std::size_t k = 0; k < n_entries_; ++k) {
            const double* row = jac_.data() + k * full;
            for (std::size_t i = 0; i < n_free_; ++i) {
                jac_free_(k, i) = row[stored_coord_[i]] - row[last_coord_[i]];
            }
        }
    }

    void solve_damped(double lambda, ParameterVector& step) {
        gram_ = jac_free_ * jac_free_.transpose();
        gram_.diagonal().array() += lambda;
        Eigen::Map<const Eigen::VectorXd> r(residual_.data(), n_entries_);
        const Eigen::VectorXd y = gram_.llt().solve(-r);
        const Eigen::VectorXd d = jac_free_.transpose() * y;
        step.assign(d.data(), d.data() + d.size());
    }

    std::size_t full_coord(const SimplexBlock& block, int entry) const {
        if (block.is_source) {
            return plan_.source_offset(block.source) + static_cast<std::size_t>(entry);
        }
        const int p = block.party;
        const std::size_t hp = plan_.party_hidden_size[p];
        const std::size_t stride = static_cast<std::size_t>(plan_.M[p]) * hp;
        return plan_.response_offset(p) + static_cast<std::size_t>(entry) * stride +
               static_cast<std::size_t>(block.input) * hp + block.hidden;
    }

    void unpack(const ParameterVector& v) {
        for (const auto& block : layout_.blocks) {
            double partial = 0.0;
            if (block.is_source) {
                double* dst = full_.data() + plan_.source_offset(block.source);
                for (int i = 0; i < block.stored_length; ++i) {
                    dst[i] = v[block.offset + static_cast<std::size_t>(i)];
                    partial += dst[i];
                }
                dst[block.full_length - 1] = 1.0 - partial;
            } else {
                const int p = block.party;
                const std::size_t hp = plan_.party_hidden_size[p];
                const std::size_t stride = static_cast<std::size_t>(plan_.M[p]) * hp;
                double* dst = full_.data() + plan_.response_offset(p) +
                              static_cast<std::size_t>(block.input) * hp + block.hidden;
                for (int o = 0; o < block.stored_length; ++o) {
                    const double x = v[block.offset + static_cast<std::size_t>(o)];
                    dst[static_cast<std::size_t>(o) * stride] = x;
                    partial += x;
                }
                dst[static_cast<std::size_t>(block.full_length - 1) * stride] = 1.0 - partial;
            }
        }
    }

    ParameterLayout layout_;
    detail::ContractionPlan plan_;
    std::vector<double> target_;
    std::size_t n_entries_ = 0;
    std::size_t n_free_ = 0;

    std::vector<double> full_;
    std::vector<const double*> source_ptrs_;
    std::vector<const double*> response_ptrs_;
    std::vector<std::size_t> stored_coord_;
    std::vector<std::size_t> last_coord_;

    std::vector<double> table_;
    std::vector<double> residual_;
    std::vector<double> jac_;
    std::vector<double> grad_full_;
    Eigen::MatrixXd jac_free_;
    Eigen::MatrixXd gram_;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pivot_of_;
};

void project_in_place(ParameterVector& v, const ParameterLayout& layout) {
    for (const auto& block : layout.blocks) {
        project_block(v.data() + block.offset, block.stored_length);
    }
}

}  // namespace

double rmse_of(double cost, std::size_t n_entries) {
    if (cost < 0.0 || n_entries < 1) {
        throw DomainError("rmse_of: requires cost >= 0 and n_entries >= 1");
    }
    return std::sqrt(cost / static_cast<double>(n_entries));
}

double cost(const ParameterVector& vector, const ParameterLayout& layout,
            const Behaviour& target) {
    check_feasible(vector, layout);
    Evaluator ev(layout, target);
    return ev.cost_only(vector);
}

ParameterVector cost_gradient(const ParameterVector& vector,
                              const ParameterLayout& layout,
                              const Behaviour& target) {
    check_feasible(vector, layout);
    Evaluator ev(layout, target);
    ParameterVector grad;
    ev.cost_and_gradient(vector, grad);
    return grad;
}

ParameterVector project_feasible(ParameterVector vector, const ParameterLayout& layout) {
    if (vector.size() != layout.total_stored) {
        throw FeasibilityError("project_feasible: vector length does not match layout");
    }
    project_in_place(vector, layout);
    return vector;
}

ParameterVector random_feasible(const ParameterLayout& layout, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    ParameterVector v(layout.total_stored);
    std::vector<double> sample;
    for (const auto& block : layout.blocks) {
        if (block.stored_length == 0) continue;
        sample.resize(block.full_length);
        double sum = 0.0;
        for (double& e : sample) {
            e = exponential_1(eng);
            sum += e;
        }
        for (int i = 0; i < block.stored_length; ++i) {
            v[block.offset + static_cast<std::size_t>(i)] = sample[i] / sum;
        }
    }
    return v;
}

SolveOutcome solve_single(const ParameterVector& start, const ParameterLayout& layout,
                          const Behaviour& target, const SolverSettings& settings) {
    check_feasible(start, layout, settings.feasibility_tol);
    Evaluator ev(layout, target);

    const double cost_target =
        settings.stop_at_cost_target
            ? 0.25 * settings.rmse_threshold * settings.rmse_threshold *
                  static_cast<double>(ev.n_entries())
            : 0.0;

    ParameterVector x = start;
    project_in_place(x, layout);  // flush sub-tolerance wobble off the boundary

    ParameterVector grad, new_grad, trial, step, pg, x_prev;
    double c = ev.cost_and_gradient(x, grad);
    if (!std::isfinite(c)) {
        return {std::move(x), c, 0, "numerical_failure"};
    }

    double bb_step = 1.0;
    bool bb_ready = false;
    double lm_lambda = -1.0;
    int lm_period = 1;
    int lm_cooldown = 0;
    int iter = 0;

    ParameterVector pg0 = x;
    for (std::size_t i = 0; i < x.size(); ++i) pg0[i] -= grad[i];
    project_in_place(pg0, layout);
    double pg0_norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        pg0_norm = std::max(pg0_norm, std::abs(pg0[i] - x[i]));
    }
    if (pg0_norm <= settings.gtol) {
        return {std::move(x), c, 0, "converged"};
    }
    if (settings.stop_at_cost_target && c <= cost_target) {
        return {std::move(x), c, 0, "cost_target"};
    }

    // Alternating-least-squares warmup: block-exact moves cross the ridges
    // that trap joint steps started from random points.
    for (int sweep = 0; sweep < 24 && iter < settings.max_iterations; ++sweep) {
        const double c_sweep = ev.als_sweep(x);
        ++iter;
        const bool converged_enough = !(c_sweep < c * (1.0 - 1e-3));
        c = std::min(c_sweep, c);
        if (converged_enough || c <= cost_target) break;
    }
    c = std::min(c, ev.cost_and_gradient(x, grad));

    // When the joint loop runs out of decreasing directions, one more
    // sweep often frees it; give up only if the sweep is stuck too.
    auto stalled = [&]() {
        if (iter >= settings.max_iterations) return true;
        const double c_sweep = ev.als_sweep(x);
        ++iter;
        const bool stuck = !(c_sweep < c * (1.0 - 1e-10));
        c = std::min(std::min(c_sweep, ev.cost_and_gradient(x, new_grad)), c);
        grad.swap(new_grad);
        bb_ready = false;
        return stuck;
    };

    std::string reason = "max_iterations";
    for (; iter < settings.max_iterations; ++iter) {
        // projected-gradient stationarity
        pg = x;
        for (std::size_t i = 0; i < x.size(); ++i) pg[i] -= grad[i];
        project_in_place(pg, layout);
        double pg_norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            pg_norm = std::max(pg_norm, std::abs(pg[i] - x[i]));
        }
        if (pg_norm <= settings.gtol) {
            reason = "converged";
            break;
        }
        if (settings.stop_at_cost_target && c <= cost_target) {
            reason = "cost_target";
            break;
        }

        x_prev = x;
        bool stepped = false;

        // damped Gauss-Newton trials, throttled when they repeatedly miss:
        // the full clipped step first, then the step along the active face
        // (clipping stalls precisely at boundary optima)
        if (lm_cooldown == 0) {
            if (lm_lambda < 0.0) lm_lambda = 1e-3 * (ev.jacobian_row_scale() + 1e-12);
            bool accepted = false;
            auto try_step = [&]() {
                trial = x;
                for (std::size_t i = 0; i < x.size(); ++i) trial[i] += step[i];
                project_in_place(trial, layout);
                const double c_trial = ev.cost_only(trial);
                if (std::isfinite(c_trial) && c_trial < c) {
                    x.swap(trial);
                    return true;
                }
                return false;
            };
            for (int attempt = 0; attempt < 3 && !accepted; ++attempt) {
                ev.gauss_newton_step(lm_lambda, step);
                accepted = try_step();
                if (!accepted &&
                    ev.gauss_newton_step_active(lm_lambda, x, grad, step)) {
                    accepted = try_step();
                }
                if (accepted) {
                    lm_lambda = std::max(lm_lambda * 0.35, 1e-14);
                } else {
                    lm_lambda *= 8.0;
                }
            }
            if (accepted) {
                stepped = true;
                lm_period = 1;
            } else {
                lm_period = std::min(lm_period * 2, 32);
                lm_cooldown = lm_period - 1;
            }
        } else {
            --lm_cooldown;
        }

        if (!stepped) {
            // spectral projected gradient with monotone Armijo backtracking
            const double alpha = std::clamp(
                bb_ready ? bb_step : 1.0 / std::max(pg_norm, 1e-12), 1e-8, 1e8);
            step = x;
            for (std::size_t i = 0; i < x.size(); ++i) step[i] -= alpha * grad[i];
            project_in_place(step, layout);
            double descent = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                step[i] -= x[i];
                descent += grad[i] * step[i];
            }
            if (descent >= 0.0) {
                // fall back to the unscaled projection arc
                descent = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    step[i] = pg[i] - x[i];
                    descent += grad[i] * step[i];
                }
                if (descent >= 0.0) {
                    if (stalled()) {
                        reason = "no_progress";
                        break;
                    }
                    continue;
                }
            }
            bool accepted = false;
            for (double t = 1.0; t >= 0x1p-48; t *= 0.5) {
                trial = x;
                for (std::size_t i = 0; i < x.size(); ++i) trial[i] += t * step[i];
                const double c_trial = ev.cost_only(trial);
                if (std::isfinite(c_trial) && c_trial <= c + 1e-4 * t * descent) {
                    x.swap(trial);
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (stalled()) {
                    reason = "no_progress";
                    break;
                }
                continue;
            }
            stepped = true;
        }

        // canonical cost and gradient at the accepted point; taking the
        // smaller of the two evaluation paths keeps the sequence monotone
        // down to the last bits
        double c_next = ev.cost_and_gradient(x, new_grad);
        if (!std::isfinite(c_next)) {
            reason = "numerical_failure";
            ++iter;
            break;
        }
        c_next = std::min(c_next, c);

        double sts = 0.0, sty = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double si = x[i] - x_prev[i];
            sts += si * si;
            sty += si * (new_grad[i] - grad[i]);
        }
        if (sty > 1e-300 && sts > 0.0) {
            bb_step = sts / sty;
            bb_ready = true;
        } else {
            bb_ready = false;
        }

        c = c_next;
        grad.swap(new_grad);
    }

    return {std::move(x), c, iter, reason};
}

FitResult fit(const Behaviour& target, const NetworkTopology& topo,
              const std::vector<int>& cardinalities, const SolverSettings& settings) {
    if (settings.restarts < 1) throw DomainError("fit: restarts must be >= 1");
    ParameterLayout layout = ParameterLayout::create(topo, cardinalities);
    {
        Evaluator shape_check(layout, target);  // validates target/topology agreement
        (void)shape_check;
    }

    const int n = settings.restarts;
    std::vector<RestartRecord> records(n);
    std::vector<ParameterVector> solutions(n);

    // Near-critical optima tend to share the symmetry of the target;
    // flat random starts in the full parameter space essentially never
    // reach their basins, so odd restarts draw group-invariant starts
    // whenever the scenario has a target-preserving automorphism.
    const auto group =
        detail::target_preserving_automorphisms(topo, cardinalities, target);
    const bool has_symmetry = group.size() > 1;

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= n) return;
            const std::uint64_t seed = derive_seed(settings.master_seed,
                                                   static_cast<std::uint64_t>(r));
            try {
                ParameterVector x0 =
                    (has_symmetry && r % 2 == 1)
                        ? detail::random_feasible_invariant(layout, seed, group)
                        : random_feasible(layout, seed);
                SolveOutcome out = solve_single(x0, layout, target, settings);
                records[r] = {seed, out.cost, out.iterations, out.reason};
                solutions[r] = std::move(out.x);
            } catch (const std::exception& e) {
                records[r] = {seed, kInf, 0, std::string("error: ") + e.what()};
                solutions[r].clear();
            }
        }
    };

    int n_threads = settings.threads > 0
                        ? settings.threads
                        : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp(n_threads, 1, n);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    int best = -1;
    for (int r = 0; r < n; ++r) {
        if (solutions[r].empty()) continue;
        const double c = std::isfinite(records[r].cost) ? records[r].cost : kInf;
        if (best < 0 || c < (std::isfinite(records[best].cost) ? records[best].cost : kInf)) {
            best = r;
        }
    }
    if (best < 0) {
        throw NumericalFailure("fit: every restart failed");
    }

    FitResult result;
    result.per_restart = std::move(records);
    result.best_index = best;
    result.best_cost = result.per_restart[best].cost;
    result.best_model = unpack_parameters(project_feasible(solutions[best], layout), layout);
    const std::size_t n_entries = target.data.size();
    result.best_rmse = rmse_of(result.best_cost, n_entries);
    result.success = result.best_rmse <= settings.rmse_threshold;
    return result;
}

}  // namespace netlocal
