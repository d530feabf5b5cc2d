#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "confidence.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "policies.hpp"
#include "regressors.hpp"
#include "selection.hpp"
#include "types.hpp"

namespace sparse_bandit {

struct RegressorSpec {
    enum class Kind { Passthrough, Ridge };
    Kind kind = Kind::Passthrough;
    double noise_bound = 1.0;  ///< ridge prediction clip is [-1 - noise_bound, 1 + noise_bound]

    bool operator==(const RegressorSpec&) const = default;
};

struct PolicySpec {
    enum class Kind { Oful, Greedy, SparseLinUcb, AdaLinUcb, FixedLevel };
    enum class Distribution { Uniform, Theory, Known };

    std::string label;
    Kind kind = Kind::Oful;

    /// SparseLinUCB level distribution, and the Exp3 prior of AdaLinUCB
    /// (Uniform or Theory).
    Distribution distribution = Distribution::Uniform;
    double c_param = 1.0;
    /// Level for Known / FixedLevel. Unset means the sparsity-scaled level.
    std::optional<std::size_t> level;

    Exp3State::EtaMode eta_mode = Exp3State::EtaMode::TimeVarying;
    /// Fixed learning rate; unset with a fixed mode means sqrt(log n / (T n)).
    std::optional<double> eta;
    double explore_q = 0.0;
    /// Prior-weighted softmax; false gives the plain softmax of the analysis.
    bool prior_weighted = true;

    bool operator==(const PolicySpec&) const = default;
};

struct ExperimentConfig {
    std::size_t d = 0;
    std::size_t k_actions = 30;
    std::vector<std::size_t> sparsity;
    std::uint64_t horizon = 0;
    std::size_t repetitions = 20;
    std::vector<PolicySpec> policies;
    LadderMode ladder_mode = LadderMode::TimeDependent;
    /// 0 resolves to the automatic size for fixed-horizon ladders.
    std::size_t n_levels = 6;
    bool include_greedy_level = true;
    NoiseModel noise = NoiseModel::uniform();
    std::uint64_t seed = 0;
    std::string output = "results";
    std::size_t refresh_period = Covariance::kDefaultRefreshPeriod;
    bool shared_noise = false;
    RegressorSpec regressor;
    double c_universal = 1.0;
    /// Worker threads for repetitions; 0 uses the hardware concurrency.
    std::size_t threads = 0;

    bool operator==(const ExperimentConfig&) const = default;

    /// Throws ConfigError naming the offending key.
    void validate() const {
        if (d == 0) throw ConfigError("d: must be positive");
        if (k_actions == 0) throw ConfigError("k_actions: must be positive");
        if (horizon == 0) throw ConfigError("horizon: must be positive");
        if (repetitions == 0) throw ConfigError("repetitions: must be positive");
        if (refresh_period == 0) throw ConfigError("refresh_period: must be positive");
        if (sparsity.empty()) throw ConfigError("sparsity: must list at least one level");
        for (std::size_t i = 0; i < sparsity.size(); ++i)
            if (sparsity[i] == 0 || sparsity[i] > d)
                throw ConfigError("sparsity[" + std::to_string(i) + "]: must lie in [1, d]");
        if (n_levels == 0 && ladder_mode != LadderMode::FixedHorizon)
            throw ConfigError("ladder.n_levels: automatic size requires the fixed_horizon ladder");
        if (n_levels > 60) throw ConfigError("ladder.n_levels: too large");
        if (!(c_universal > 0.0)) throw ConfigError("c_universal: must be positive");
        if (policies.empty()) throw ConfigError("policies: need at least one policy");
        std::set<std::string> labels;
        for (std::size_t i = 0; i < policies.size(); ++i) {
            const auto& p = policies[i];
            const std::string key = "policies[" + std::to_string(i) + "]";
            if (p.label.empty()) throw ConfigError(key + ".label: must be nonempty");
            if (p.label.find_first_of(",\"\n\r") != std::string::npos)
                throw ConfigError(key + ".label: must not contain commas, quotes or newlines");
            if (!labels.insert(p.label).second) throw ConfigError(key + ".label: duplicate label '" + p.label + "'");
            if (!(p.c_param >= 1.0)) throw ConfigError(key + ".c: must be >= 1");
            if (!(p.explore_q >= 0.0 && p.explore_q <= 1.0)) throw ConfigError(key + ".explore_q: must lie in [0, 1]");
            if (p.eta && !(*p.eta > 0.0)) throw ConfigError(key + ".eta: must be positive");
            if (p.kind == PolicySpec::Kind::AdaLinUcb && p.distribution == PolicySpec::Distribution::Known)
                throw ConfigError(key + ".prior: known is not an Exp3 prior");
        }
    }
};

/// Ladder used for one sparsity level of an experiment.
inline RadiusLadder make_ladder(const ExperimentConfig& cfg, std::size_t sparsity) {
    std::size_t n = cfg.n_levels;
    if (n == 0) {
        // Largest l1 norm of a unit vector with `sparsity` nonzeros is sqrt(S).
        const double b_t = seqsew_regret_bound(sparsity, std::sqrt(static_cast<double>(sparsity)), cfg.horizon,
                                               cfg.c_universal);
        const double delta = std::min(0.25, 1.0 / static_cast<double>(cfg.horizon));
        const double gamma = gamma_delta({b_t, delta, cfg.c_universal, cfg.horizon});
        n = auto_ladder_size(cfg.d, cfg.horizon, gamma);
    }
    return RadiusLadder(cfg.ladder_mode, n, cfg.horizon, cfg.include_greedy_level);
}

inline std::unique_ptr<OnlineRegressor> make_regressor(const RegressorSpec& spec, std::size_t dim,
                                                       std::size_t refresh_period) {
    switch (spec.kind) {
        case RegressorSpec::Kind::Passthrough:
            return std::make_unique<PassthroughRegressor>();
        case RegressorSpec::Kind::Ridge:
            return std::make_unique<RidgeRegressor>(dim, spec.noise_bound, refresh_period);
    }
    throw InvalidInput("unknown regressor kind");
}

/// Ladder level used by a Known / FixedLevel policy at the given sparsity.
inline std::size_t resolve_level(const PolicySpec& spec, const RadiusLadder& ladder, std::size_t sparsity) {
    if (spec.level) {
        ladder.position_of(*spec.level);
        return *spec.level;
    }
    return sparsity_scaled_level(ladder, sparsity);
}

inline std::vector<double> prior_weights(const PolicySpec& spec, std::size_t n) {
    if (spec.distribution == PolicySpec::Distribution::Theory) return theory_distribution(spec.c_param, n).probs;
    return SelectionDistribution::uniform(n).probs;
}

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ExperimentConfig& cfg,
                                           const RadiusLadder& ladder, std::size_t sparsity) {
    auto reg = make_regressor(cfg.regressor, cfg.d, cfg.refresh_period);
    const std::size_t n = ladder.n_levels();
    switch (spec.kind) {
        case PolicySpec::Kind::Oful:
            return std::make_unique<OfulPolicy>(cfg.d, cfg.horizon, std::move(reg), cfg.refresh_period);
        case PolicySpec::Kind::Greedy:
            return std::make_unique<GreedyPolicy>(cfg.d, std::move(reg), cfg.refresh_period);
        case PolicySpec::Kind::FixedLevel:
            return std::make_unique<FixedLevelPolicy>(cfg.d, ladder, resolve_level(spec, ladder, sparsity),
                                                      std::move(reg), cfg.refresh_period);
        case PolicySpec::Kind::SparseLinUcb: {
            SelectionDistribution dist;
            switch (spec.distribution) {
                case PolicySpec::Distribution::Uniform:
                    dist = SelectionDistribution::uniform(n);
                    break;
                case PolicySpec::Distribution::Theory:
                    dist = theory_distribution(spec.c_param, n);
                    break;
                case PolicySpec::Distribution::Known:
                    dist = SelectionDistribution::point_mass(
                        n, ladder.position_of(resolve_level(spec, ladder, sparsity)));
                    break;
            }
            return std::make_unique<SparseLinUcbPolicy>(cfg.d, ladder, std::move(dist), std::move(reg),
                                                        cfg.refresh_period);
        }
        case PolicySpec::Kind::AdaLinUcb: {
            std::vector<double> prior = spec.prior_weighted ? prior_weights(spec, n)
                                                            : SelectionDistribution::uniform(n).probs;
            const double eta = spec.eta_mode == Exp3State::EtaMode::Fixed
                                   ? spec.eta.value_or(exp3_theory_eta(n, cfg.horizon))
                                   : 0.0;
            auto exp3 = Exp3State::make(std::move(prior), spec.eta_mode, eta, spec.explore_q);
            return std::make_unique<AdaLinUcbPolicy>(cfg.d, ladder, std::move(exp3), std::move(reg),
                                                     cfg.refresh_period);
        }
    }
    throw InvalidInput("unknown policy kind");
}

/// Per-round output of one episode.
struct RegretTrace {
    std::string label;
    std::uint64_t seed = 0;
    std::vector<double> instantaneous;
    std::vector<double> cumulative;
    std::vector<int> levels;
    std::vector<std::size_t> chosen;
    double wall_seconds = 0.0;
    double elliptic_potential = 0.0;
    double final_log_det = 0.0;

    std::size_t length() const noexcept { return instantaneous.size(); }
};

struct EpisodeSeeds {
    std::uint64_t trace_seed = 0;   ///< repetition seed recorded in the trace
    std::uint64_t policy_seed = 0;  ///< level draws, Bernoulli exploration
    std::uint64_t noise_seed = 0;   ///< reward noise
};

/// Plays `policy` on `instance` for `horizon` rounds.
inline RegretTrace run_episode(Policy& policy, BanditInstance& instance, std::uint64_t horizon,
                               const EpisodeSeeds& seeds, const std::string& label) {
    const auto start = std::chrono::steady_clock::now();
    Rng policy_rng(seeds.policy_seed);
    Rng noise_rng(seeds.noise_seed);
    RegretTrace trace;
    trace.label = label;
    trace.seed = seeds.trace_seed;
    trace.instantaneous.reserve(horizon);
    trace.cumulative.reserve(horizon);
    trace.levels.reserve(horizon);
    trace.chosen.reserve(horizon);
    Transcript transcript;
    transcript.reserve(horizon);
    double cum = 0.0;
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        try {
            auto set = instance.next_set(transcript);
            const Choice c = policy.choose(*set, policy_rng, t);
            const Vector a = set->col(static_cast<Eigen::Index>(c.index));
            const double x = instance.reward(a, noise_rng);
            const double r = instance.instantaneous_regret(*set, c.index);
            policy.observe(x);
            cum += r;
            trace.instantaneous.push_back(r);
            trace.cumulative.push_back(cum);
            trace.levels.push_back(c.level);
            trace.chosen.push_back(c.index);
            transcript.push_back({std::move(set), c.index, x});
        } catch (const EpisodeError&) {
            throw;
        } catch (const std::exception& e) {
            throw EpisodeError(static_cast<std::size_t>(t), label, e.what());
        }
    }
    const Covariance& cov = policy.covariance();
    trace.elliptic_potential = cov.elliptic_potential();
    trace.final_log_det = cov.log_det();
    if (trace.elliptic_potential > 2.0 * trace.final_log_det + 1e-9)
        throw InternalCorruption(label + ": elliptic potential " + std::to_string(trace.elliptic_potential) +
                                 " exceeds 2 log det V_T = " + std::to_string(2.0 * trace.final_log_det));
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

namespace seed_stream {
inline constexpr std::uint64_t kInstance = 1;
inline constexpr std::uint64_t kPolicy = 2;
inline constexpr std::uint64_t kNoise = 3;
}  // namespace seed_stream

inline std::uint64_t repetition_seed(std::uint64_t base, std::size_t repetition) {
    return derive_seed(base, repetition);
}

/// Seeds for one (repetition, sparsity, policy) cell. Keyed by label so the
/// roster order and membership never move another policy's streams.
inline EpisodeSeeds episode_seeds(const ExperimentConfig& cfg, std::size_t repetition, std::size_t sparsity,
                                  const std::string& label) {
    const std::uint64_t rep = repetition_seed(cfg.seed, repetition);
    const std::uint64_t key = hash_label(label);
    EpisodeSeeds s;
    s.trace_seed = rep;
    s.policy_seed = derive_seed(rep, sparsity, key, seed_stream::kPolicy);
    s.noise_seed = cfg.shared_noise ? derive_seed(rep, sparsity, seed_stream::kNoise)
                                    : derive_seed(rep, sparsity, key, seed_stream::kNoise);
    return s;
}

inline std::uint64_t instance_seed(const ExperimentConfig& cfg, std::size_t repetition, std::size_t sparsity) {
    return derive_seed(repetition_seed(cfg.seed, repetition), sparsity, seed_stream::kInstance);
}

struct AggregateResult {
    std::string label;
    std::vector<double> mean;
    std::vector<double> std;
    std::size_t repetitions = 0;
};

/// Pointwise mean and population standard deviation of cumulative regret.
inline AggregateResult aggregate(std::span<const RegretTrace> traces) {
    if (traces.empty()) throw InvalidInput("aggregate: no traces");
    const std::string& label = traces.front().label;
    const std::size_t len = traces.front().cumulative.size();
    for (const auto& tr : traces) {
        if (tr.label != label) throw InvalidInput("aggregate: mixed labels '" + label + "' and '" + tr.label + "'");
        if (tr.cumulative.size() != len) throw InvalidInput("aggregate: traces differ in length");
    }
    AggregateResult out{label, std::vector<double>(len, 0.0), std::vector<double>(len, 0.0), traces.size()};
    // Welford, pointwise.
    std::vector<double> m2(len, 0.0);
    std::size_t count = 0;
    for (const auto& tr : traces) {
        ++count;
        for (std::size_t t = 0; t < len; ++t) {
            const double x = tr.cumulative[t];
            const double delta = x - out.mean[t];
            out.mean[t] += delta / static_cast<double>(count);
            m2[t] += delta * (x - out.mean[t]);
        }
    }
    for (std::size_t t = 0; t < len; ++t) out.std[t] = std::sqrt(std::max(0.0, m2[t]) / static_cast<double>(count));
    return out;
}

/// All traces and aggregates for one sparsity level.
struct SparsityResult {
    std::size_t sparsity = 0;
    std::size_t n_levels = 0;
    /// traces[p][r]: policy p (roster order), repetition r.
    std::vector<std::vector<RegretTrace>> traces;
    std::vector<AggregateResult> aggregates;
};

struct ExperimentResult {
    std::vector<SparsityResult> per_sparsity;
};

/// Runs every roster policy on a fresh instance per (repetition, sparsity).
/// Repetitions are distributed over worker threads; results do not depend on
/// the thread count.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t n_pol = cfg.policies.size();
    ExperimentResult result;
    result.per_sparsity.resize(cfg.sparsity.size());
    struct Task {
        std::size_t s_idx;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    for (std::size_t si = 0; si < cfg.sparsity.size(); ++si) {
        auto& sr = result.per_sparsity[si];
        sr.sparsity = cfg.sparsity[si];
        sr.n_levels = make_ladder(cfg, sr.sparsity).n_levels();
        sr.traces.assign(n_pol, std::vector<RegretTrace>(cfg.repetitions));
        for (std::size_t r = 0; r < cfg.repetitions; ++r) tasks.push_back({si, r});
    }

    auto run_task = [&](const Task& task) {
        const std::size_t s = cfg.sparsity[task.s_idx];
        const RadiusLadder ladder = make_ladder(cfg, s);
        Rng inst_rng(instance_seed(cfg, task.rep, s));
        const BanditInstance base = generate_fixed_sphere_instance(cfg.d, cfg.k_actions, s, inst_rng, cfg.noise);
        for (std::size_t p = 0; p < n_pol; ++p) {
            const PolicySpec& spec = cfg.policies[p];
            BanditInstance instance = base;
            auto policy = make_policy(spec, cfg, ladder, s);
            result.per_sparsity[task.s_idx].traces[p][task.rep] =
                run_episode(*policy, instance, cfg.horizon, episode_seeds(cfg, task.rep, s, spec.label), spec.label);
        }
    };

    std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, tasks.size());
    if (workers <= 1) {
        for (const auto& task : tasks) run_task(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++) {
                    try {
                        run_task(tasks[i]);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = tasks.size();
                    }
                }
            });
        }
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }

    for (auto& sr : result.per_sparsity)
        for (std::size_t p = 0; p < n_pol; ++p)
            sr.aggregates.push_back(aggregate(std::span<const RegretTrace>(sr.traces[p])));
    return result;
}

}  // namespace sparse_bandit
