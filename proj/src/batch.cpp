#include "maneuver/batch.hpp"

#include <array>
#include <chrono>
#include <exception>

#include "maneuver/losscalc.hpp"

namespace maneuver {

namespace {

struct ChunkRange {
    size_t begin = 0;
    size_t end = 0;
};

ChunkRange chunk_range(size_t n, int chunk) {
    return {n * chunk / kBatchChunks, n * (chunk + 1) / kBatchChunks};
}

// Runs fn(0) .. fn(kBatchChunks-1). The parallel flavor must not change any
// result: all cross-chunk reduction happens after this returns.
template <class Fn>
void run_chunks(ExecMode mode, Fn&& fn) {
#ifdef _OPENMP
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < kBatchChunks; ++c) fn(c);
        return;
    }
#else
    (void)mode;
#endif
    for (int c = 0; c < kBatchChunks; ++c) fn(c);
}

void rethrow_first(const std::array<std::exception_ptr, kBatchChunks>& errs) {
    for (const std::exception_ptr& e : errs) {
        if (e) std::rethrow_exception(e);
    }
}

LossBreakdown to_breakdown(const LossTermsT<double>& t) {
    LossBreakdown b;
    b.coll = t.coll;
    b.curv = t.curv;
    b.over = t.over;
    b.tcurv = t.tcurv;
    b.total = t.total;
    b.feasible = t.feasible;
    return b;
}

}  // namespace

BatchEval evaluate_scenarios(const PolicyNet& net, const VehicleParams& params,
                             std::span<const BatchItem> items, int n_segments,
                             const LossOptions& options, ExecMode mode) {
    BatchEval out;
    out.items.resize(items.size());
    if (items.empty()) return out;

    std::array<std::exception_ptr, kBatchChunks> errs{};
    std::array<PolicyWorkspace, kBatchChunks> ws;
    run_chunks(mode, [&](int c) {
        const ChunkRange r = chunk_range(items.size(), c);
        try {
            for (size_t i = r.begin; i < r.end; ++i) {
                const BatchItem& it = items[i];
                const auto t0 = std::chrono::steady_clock::now();
                const RolloutResult roll =
                    rollout(net, *it.grid, params, it.q0, it.goal, n_segments, &ws[c]);
                const DiscretizedPath d = discretize(roll.path);
                const auto t1 = std::chrono::steady_clock::now();

                ScenarioEval& ev = out.items[i];
                ev.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                ev.length = d.total_length();
                ev.accumulated_turn = d.accumulated_turn();
                ev.loss = to_breakdown(loss_terms_t<double>(d.segments, *it.grid, params,
                                                            it.ref_path, it.goal, options));
            }
        } catch (...) {
            errs[c] = std::current_exception();
        }
    });
    rethrow_first(errs);
    for (const ScenarioEval& ev : out.items) out.feasible_count += ev.loss.feasible ? 1 : 0;
    return out;
}

BatchGradient batch_gradient(const PolicyNet& net, const VehicleParams& params,
                             std::span<const BatchItem> items, int n_segments,
                             const LossOptions& options, ExecMode mode) {
    BatchGradient out;
    out.param_grads.assign(net.param_count(), 0.0);
    out.per_item.resize(items.size());
    if (items.empty()) return out;

    std::array<std::exception_ptr, kBatchChunks> errs{};
    std::array<PolicyWorkspace, kBatchChunks> ws;
    std::array<std::vector<double>, kBatchChunks> sums;
    run_chunks(mode, [&](int c) {
        const ChunkRange r = chunk_range(items.size(), c);
        if (r.begin == r.end) return;
        sums[c].assign(net.param_count(), 0.0);
        try {
            for (size_t i = r.begin; i < r.end; ++i) {
                const BatchItem& it = items[i];
                const GradientResult g = policy_gradient(net, *it.grid, params, it.q0,
                                                         it.goal, it.ref_path, n_segments,
                                                         options, &ws[c]);
                out.per_item[i] = g.loss;
                double* acc = sums[c].data();
                const double* pg = g.param_grads.data();
                for (size_t k = 0; k < sums[c].size(); ++k) acc[k] += pg[k];
            }
        } catch (...) {
            errs[c] = std::current_exception();
        }
    });
    rethrow_first(errs);

    for (int c = 0; c < kBatchChunks; ++c) {
        if (sums[c].empty()) continue;
        const double* acc = sums[c].data();
        for (size_t k = 0; k < out.param_grads.size(); ++k) out.param_grads[k] += acc[k];
    }
    const double inv = 1.0 / static_cast<double>(items.size());
    for (double& v : out.param_grads) v *= inv;
    for (const LossBreakdown& b : out.per_item) out.feasible_count += b.feasible ? 1 : 0;
    return out;
}

LossBreakdown mean_breakdown(std::span<const LossBreakdown> items) {
    LossBreakdown m;
    if (items.empty()) return m;
    m.feasible = true;
    for (const LossBreakdown& b : items) {
        m.coll += b.coll;
        m.curv += b.curv;
        m.over += b.over;
        m.tcurv += b.tcurv;
        m.total += b.total;
        m.feasible = m.feasible && b.feasible;
    }
    const double inv = 1.0 / static_cast<double>(items.size());
    m.coll *= inv;
    m.curv *= inv;
    m.over *= inv;
    m.tcurv *= inv;
    m.total *= inv;
    return m;
}

}  // namespace maneuver
