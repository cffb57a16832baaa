#include "maneuver/policy.hpp"

#include <cmath>

#include "maneuver/errors.hpp"
#include "maneuver/losscalc.hpp"

namespace maneuver {

namespace {

std::array<double, 9> assemble_features(const std::array<double, 5>& current,
                                        const std::array<double, 4>& goal) {
    return {current[0], current[1], current[2], current[3], current[4],
            goal[0],    goal[1],    goal[2],    goal[3]};
}

std::array<double, 4> goal_features(const GoalRegion& goal) {
    return {goal.x, goal.y, std::sin(goal.theta), std::cos(goal.theta)};
}

SegmentSpec spec_from_outputs(const std::array<double, 4>& out) {
    return {out[0], out[1], out[2], out[3]};
}

}  // namespace

PolicyInput make_policy_input(const OccupancyGrid& grid, const Configuration& current,
                              const GoalRegion& goal) {
    PolicyInput in;
    in.grid = &grid;
    in.current = {current.x, current.y, std::sin(current.theta), std::cos(current.theta),
                  current.beta};
    in.goal = goal_features(goal);
    return in;
}

SegmentSpec policy_forward(const PolicyNet& net, const PolicyInput& input,
                           PolicyWorkspace* ws) {
    if (!input.grid) throw Error("policy input has no grid");
    PolicyWorkspace local;
    PolicyWorkspace& w = ws ? *ws : local;
    net.map_forward(*input.grid, w.map);
    if (w.steps.empty()) w.steps.resize(1);
    net.step_forward(assemble_features(input.current, input.goal), w.map, w.steps[0]);
    return spec_from_outputs(w.steps[0].outputs);
}

RolloutResult rollout(const PolicyNet& net, const OccupancyGrid& grid,
                      const VehicleParams& params, const Configuration& q0,
                      const GoalRegion& goal, int n_segments, PolicyWorkspace* ws) {
    PolicyWorkspace local;
    PolicyWorkspace& w = ws ? *ws : local;
    net.map_forward(grid, w.map);
    return rollout(net, w.map, params, q0, goal, n_segments, &w);
}

RolloutResult rollout(const PolicyNet& net, const MapActivations& map,
                      const VehicleParams& params, const Configuration& q0,
                      const GoalRegion& goal, int n_segments, PolicyWorkspace* ws) {
    if (n_segments < 1) throw Error("rollout needs n_segments >= 1");
    PolicyWorkspace local;
    PolicyWorkspace& w = ws ? *ws : local;
    if (static_cast<int>(w.steps.size()) < n_segments) w.steps.resize(n_segments);

    const std::array<double, 4> gfeat = goal_features(goal);

    // Virtual move: the configuration is advanced to each segment endpoint with
    // the same arithmetic as chain(), so the features seen here match the
    // geometry built afterwards bit for bit.
    double x = q0.x;
    double y = q0.y;
    double theta = q0.theta;
    double beta = q0.beta;

    RolloutResult out;
    out.specs.reserve(n_segments);
    for (int i = 0; i < n_segments; ++i) {
        net.step_forward(
            assemble_features({x, y, std::sin(theta), std::cos(theta), beta}, gfeat), map,
            w.steps[i]);
        const SegmentSpec spec = spec_from_outputs(w.steps[i].outputs);
        out.specs.push_back(spec);

        const double c = std::cos(theta);
        const double s = std::sin(theta);
        x = x + c * spec.x_end - s * spec.y_end;
        y = y + s * spec.x_end + c * spec.y_end;
        theta = theta + std::atan(spec.dy);
        const double kappa = curvature_from_derivs(spec.dy, spec.ddy);
        beta = std::atan(kappa * params.wheelbase);
    }
    out.path = chain(q0, params, out.specs);
    return out;
}

GradientResult policy_gradient(const PolicyNet& net, const OccupancyGrid& grid,
                               const VehicleParams& params, const Configuration& q0,
                               const GoalRegion& goal, std::span<const Vec2> ref_path,
                               int n_segments, const LossOptions& options,
                               PolicyWorkspace* ws) {
    using ad::Var;
    if (n_segments < 1) throw Error("policy_gradient needs n_segments >= 1");
    PolicyWorkspace local;
    PolicyWorkspace& w = ws ? *ws : local;

    net.map_forward(grid, w.map);
    if (static_cast<int>(w.steps.size()) < n_segments) w.steps.resize(n_segments);
    w.tape.clear();
    w.d_latent.assign(net.config().latent, 0.0);

    GradientResult out;
    out.param_grads.assign(net.param_count(), 0.0);

    const std::array<double, 4> gfeat = goal_features(goal);

    // Tracked virtual-move state; constants until the first segment's outputs
    // flow in. Mirrors the frame update in chain_t.
    Var x(q0.x);
    Var y(q0.y);
    Var theta(q0.theta);
    Var sin_th(std::sin(q0.theta));
    Var cos_th(std::cos(q0.theta));
    Var beta(q0.beta);

    std::vector<ad::Tape::Hook> hooks;
    hooks.reserve(n_segments);
    std::vector<SegSpecT<Var>> specs;
    specs.reserve(n_segments);

    for (int i = 0; i < n_segments; ++i) {
        const std::array<int, 5> feat_ids = {x.id(), y.id(), sin_th.id(), cos_th.id(),
                                             beta.id()};
        net.step_forward(assemble_features({x.value(), y.value(), sin_th.value(),
                                            cos_th.value(), beta.value()},
                                           gfeat),
                         w.map, w.steps[i]);

        SegSpecT<Var> spec;
        spec.x_end = Var(w.tape, w.steps[i].outputs[0]);
        spec.y_end = Var(w.tape, w.steps[i].outputs[1]);
        spec.dy = Var(w.tape, w.steps[i].outputs[2]);
        spec.ddy = Var(w.tape, w.steps[i].outputs[3]);
        const std::array<int, 4> out_ids = {spec.x_end.id(), spec.y_end.id(), spec.dy.id(),
                                            spec.ddy.id()};
        specs.push_back(spec);

        // Fires when the reverse scan reaches this step's first output leaf; all
        // four leaf adjoints are final by then (every consumer has a larger id).
        // Backpropagates the network step and splices d(features) into the
        // tracked state nodes feeding this step.
        hooks.push_back(ad::Tape::Hook{
            out_ids[0], [&net, &w, &out, i, out_ids, feat_ids](std::vector<double>& adj) {
                const std::array<double, 4> dout = {adj[out_ids[0]], adj[out_ids[1]],
                                                    adj[out_ids[2]], adj[out_ids[3]]};
                std::array<double, 9> d_feat{};
                net.step_backward(w.steps[i], w.map, dout, &d_feat, &w.d_latent,
                                  &out.param_grads);
                for (int k = 0; k < 5; ++k) {
                    if (feat_ids[k] >= 0) adj[feat_ids[k]] += d_feat[k];
                }
            }});

        x = x + cos_th * spec.x_end - sin_th * spec.y_end;
        y = y + sin_th * spec.x_end + cos_th * spec.y_end;
        theta = theta + atan(spec.dy);
        sin_th = sin(theta);
        cos_th = cos(theta);
        const Var kappa = curvature_from_derivs(spec.dy, spec.ddy);
        beta = atan(kappa * params.wheelbase);
    }

    const std::vector<QuinticT<Var>> segs =
        chain_t<Var>(q0, params, std::span<const SegSpecT<Var>>(specs));
    const auto sampled = discretize_t<Var>(std::span<const QuinticT<Var>>(segs));
    const LossTermsT<Var> terms =
        loss_terms_t<Var>(sampled, grid, params, ref_path, goal, options);

    out.loss.coll = terms.coll.value();
    out.loss.curv = terms.curv.value();
    out.loss.over = terms.over.value();
    out.loss.tcurv = terms.tcurv.value();
    out.loss.total = terms.total.value();
    out.loss.feasible = terms.feasible;

    // An untracked total means the loss sits on an all-flat piece (every term
    // zero or gated off); the gradient is identically zero there.
    if (terms.total.tracked()) {
        w.tape.backward(terms.total.id(), hooks);
        net.map_backward(w.map, w.d_latent, &out.param_grads);
    }

    if (!std::isfinite(out.loss.total)) {
        throw NonFiniteGradient("loss is not finite");
    }
    for (const double g : out.param_grads) {
        if (!std::isfinite(g)) throw NonFiniteGradient("parameter gradient is not finite");
    }
    return out;
}

}  // namespace maneuver
