#pragma once

#include <array>
#include <cmath>

namespace coniso {

// Forward-mode scalar carrying K directional derivatives alongside the value.
// Only the operations needed by the curvature formulas are provided.
template <int K>
struct Dual {
    double v = 0.0;
    std::array<double, K> d{};

    Dual() = default;
    Dual(double value) : v(value) {}

    static Dual seed(double value, int slot) {
        Dual x(value);
        x.d[slot] = 1.0;
        return x;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < K; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < K; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual operator-() const {
        Dual r(-v);
        for (int i = 0; i < K; ++i) r.d[i] = -d[i];
        return r;
    }
};

template <int K>
inline Dual<K> operator+(Dual<K> a, const Dual<K>& b) { return a += b; }
template <int K>
inline Dual<K> operator-(Dual<K> a, const Dual<K>& b) { return a -= b; }

template <int K>
inline Dual<K> operator*(const Dual<K>& a, const Dual<K>& b) {
    Dual<K> r(a.v * b.v);
    for (int i = 0; i < K; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}

template <int K>
inline Dual<K> operator/(const Dual<K>& a, const Dual<K>& b) {
    Dual<K> r(a.v / b.v);
    const double inv = 1.0 / b.v;
    for (int i = 0; i < K; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}

template <int K>
inline Dual<K> sqrt(const Dual<K>& a) {
    Dual<K> r(std::sqrt(a.v));
    const double g = 0.5 / r.v;
    for (int i = 0; i < K; ++i) r.d[i] = g * a.d[i];
    return r;
}

template <int K>
inline Dual<K> operator+(Dual<K> a, double b) {
    a.v += b;
    return a;
}
template <int K>
inline Dual<K> operator+(double a, Dual<K> b) {
    b.v += a;
    return b;
}
template <int K>
inline Dual<K> operator-(Dual<K> a, double b) {
    a.v -= b;
    return a;
}
template <int K>
inline Dual<K> operator-(double a, const Dual<K>& b) {
    return Dual<K>(a) - b;
}
template <int K>
inline Dual<K> operator*(Dual<K> a, double b) {
    a.v *= b;
    for (int i = 0; i < K; ++i) a.d[i] *= b;
    return a;
}
template <int K>
inline Dual<K> operator*(double a, Dual<K> b) {
    return b * a;
}
template <int K>
inline Dual<K> operator/(Dual<K> a, double b) {
    return a * (1.0 / b);
}
template <int K>
inline Dual<K> operator/(double a, const Dual<K>& b) {
    return Dual<K>(a) / b;
}

// Chain rule helper: lift a univariate function through x given f(x.v), f'(x.v).
template <int K>
inline Dual<K> chain(const Dual<K>& x, double f, double df) {
    Dual<K> r(f);
    for (int i = 0; i < K; ++i) r.d[i] = df * x.d[i];
    return r;
}

// Plain-double overloads so the geometry kernels can be instantiated with T = double.
inline double chain(double /*x*/, double f, double /*df*/) { return f; }
using std::sqrt;

}  // namespace coniso
