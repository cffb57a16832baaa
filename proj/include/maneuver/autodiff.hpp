#pragma once

// Reverse-mode automatic differentiation on an index-arena tape.
//
// Partial derivatives are computed at record time, so a Node only stores
// parent ids and the two local partials; the backward pass is a single
// reverse scan in id order. Var values are always carried alongside the
// tape, which keeps the forward numbers identical to an untaped run.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace maneuver::ad {

class Tape {
  public:
    struct Node {
        int p1 = -1;
        int p2 = -1;
        double d1 = 0.0;
        double d2 = 0.0;
    };

    int add_leaf() {
        nodes_.push_back(Node{});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int add_unary(int p, double d) {
        nodes_.push_back(Node{p, -1, d, 0.0});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int add_binary(int p1, double d1, int p2, double d2) {
        nodes_.push_back(Node{p1, p2, d1, d2});
        return static_cast<int>(nodes_.size()) - 1;
    }

    size_t size() const { return nodes_.size(); }

    void clear() { nodes_.clear(); }

    // A hook fires when the reverse scan reaches `id`: every contribution to
    // that node's adjoint has been applied by then. Hooks may add into the
    // adjoints of nodes with smaller ids.
    struct Hook {
        int id;
        std::function<void(std::vector<double>& adjoints)> fn;
    };

    // Seeds d(root)=1 and propagates adjoints down the tape.
    // Returns the full adjoint vector (indexed by node id).
    std::vector<double> backward(int root, std::span<const Hook> hooks = {}) const;

  private:
    std::vector<Node> nodes_;
};

class Var {
  public:
    Var() = default;
    Var(double v) : v_(v) {}                                     // constant, no node
    Var(Tape& t, double v) : tape_(&t), id_(t.add_leaf()), v_(v) {}

    double value() const { return v_; }
    int id() const { return id_; }
    bool tracked() const { return id_ >= 0; }
    Tape* tape() const { return tape_; }

    static Var raw(Tape* t, int id, double v) {
        Var r;
        r.tape_ = t;
        r.id_ = id;
        r.v_ = v;
        return r;
    }

  private:
    Tape* tape_ = nullptr;
    int id_ = -1;
    double v_ = 0.0;
};

namespace detail {
inline Var unary(const Var& a, double v, double d) {
    if (!a.tracked()) return Var(v);
    return Var::raw(a.tape(), a.tape()->add_unary(a.id(), d), v);
}

inline Var binary(const Var& a, double da, const Var& b, double db, double v) {
    if (a.tracked() && b.tracked()) {
        return Var::raw(a.tape(), a.tape()->add_binary(a.id(), da, b.id(), db), v);
    }
    if (a.tracked()) return Var::raw(a.tape(), a.tape()->add_unary(a.id(), da), v);
    if (b.tracked()) return Var::raw(b.tape(), b.tape()->add_unary(b.id(), db), v);
    return Var(v);
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
    return detail::binary(a, 1.0, b, 1.0, a.value() + b.value());
}
inline Var operator-(const Var& a, const Var& b) {
    return detail::binary(a, 1.0, b, -1.0, a.value() - b.value());
}
inline Var operator*(const Var& a, const Var& b) {
    return detail::binary(a, b.value(), b, a.value(), a.value() * b.value());
}
inline Var operator/(const Var& a, const Var& b) {
    const double bv = b.value();
    const double v = a.value() / bv;
    return detail::binary(a, 1.0 / bv, b, -v / bv, v);
}
inline Var operator-(const Var& a) { return detail::unary(a, -a.value(), -1.0); }

inline Var operator+(const Var& a, double b) { return a + Var(b); }
inline Var operator+(double a, const Var& b) { return Var(a) + b; }
inline Var operator-(const Var& a, double b) { return a - Var(b); }
inline Var operator-(double a, const Var& b) { return Var(a) - b; }
inline Var operator*(const Var& a, double b) { return a * Var(b); }
inline Var operator*(double a, const Var& b) { return Var(a) * b; }
inline Var operator/(const Var& a, double b) { return a / Var(b); }
inline Var operator/(double a, const Var& b) { return Var(a) / b; }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var sin(const Var& a) { return detail::unary(a, std::sin(a.value()), std::cos(a.value())); }
inline Var cos(const Var& a) { return detail::unary(a, std::cos(a.value()), -std::sin(a.value())); }
inline Var tan(const Var& a) {
    const double t = std::tan(a.value());
    return detail::unary(a, t, 1.0 + t * t);
}
inline Var atan(const Var& a) {
    return detail::unary(a, std::atan(a.value()), 1.0 / (1.0 + a.value() * a.value()));
}
inline Var exp(const Var& a) {
    const double e = std::exp(a.value());
    return detail::unary(a, e, e);
}
inline Var log(const Var& a) { return detail::unary(a, std::log(a.value()), 1.0 / a.value()); }
inline Var sqrt(const Var& a) {
    const double s = std::sqrt(a.value());
    return detail::unary(a, s, 0.5 / s);
}
inline Var tanh(const Var& a) {
    const double t = std::tanh(a.value());
    return detail::unary(a, t, 1.0 - t * t);
}
// Subgradient 0 at the kink.
inline Var abs(const Var& a) {
    const double v = a.value();
    return detail::unary(a, std::abs(v), v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}
inline Var relu(const Var& a) {
    const double v = a.value();
    return v > 0.0 ? a : Var(0.0);
}

}  // namespace maneuver::ad
