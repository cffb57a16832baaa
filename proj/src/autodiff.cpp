#include "maneuver/autodiff.hpp"

#include <algorithm>

namespace maneuver::ad {

std::vector<double> Tape::backward(int root, std::span<const Hook> hooks) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (root < 0 || root >= static_cast<int>(nodes_.size())) return adj;
    adj[root] = 1.0;

    // Hooks sorted by descending id so the next one to fire is always at the back.
    std::vector<const Hook*> pending;
    pending.reserve(hooks.size());
    for (const Hook& h : hooks) pending.push_back(&h);
    std::sort(pending.begin(), pending.end(),
              [](const Hook* a, const Hook* b) { return a->id > b->id; });
    size_t next = 0;

    for (int i = root; i >= 0; --i) {
        while (next < pending.size() && pending[next]->id == i) {
            pending[next]->fn(adj);
            ++next;
        }
        const double a = adj[i];
        if (a == 0.0) continue;
        const Node& n = nodes_[i];
        if (n.p1 >= 0) adj[n.p1] += a * n.d1;
        if (n.p2 >= 0) adj[n.p2] += a * n.d2;
    }
    // Hooks at ids below the scanned range still fire.
    while (next < pending.size()) {
        pending[next]->fn(adj);
        ++next;
    }
    return adj;
}

}  // namespace maneuver::ad
