#pragma once

// Forward-mode dual numbers with N tangent directions. Nesting
// Dual<Dual<double, 2>, 2> yields exact second derivatives, which is how the
// built-in surface maps obtain their frame derivatives.

#include <array>
#include <cmath>

namespace elscat {

template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT: implicit lift of constants
    Dual(T value, std::array<T, N> grad) : v(value), d(grad) {}

    static Dual variable(T value, int dir) {
        Dual x(value, {});
        x.d[dir] = T(1.0);
        return x;
    }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const T inv = T(1.0) / o.v;
        v *= inv;
        for (int i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) * inv;
        return *this;
    }
};

template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a) {
    a.v = -a.v;
    for (auto& x : a.d) x = -x;
    return a;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double b) { a.v += b; return a; }
template <class T, int N>
Dual<T, N> operator+(double b, Dual<T, N> a) { a.v += b; return a; }
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double b) { a.v -= b; return a; }
template <class T, int N>
Dual<T, N> operator-(double b, const Dual<T, N>& a) { return Dual<T, N>(b) - a; }
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double b) {
    a.v *= b;
    for (auto& x : a.d) x *= b;
    return a;
}
template <class T, int N>
Dual<T, N> operator*(double b, Dual<T, N> a) { return a * b; }
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double b) { return a * (1.0 / b); }
template <class T, int N>
Dual<T, N> operator/(double b, const Dual<T, N>& a) { return Dual<T, N>(b) / a; }

namespace detail {
// Applies a scalar function with derivative f'(v) through the chain rule.
template <class T, int N>
Dual<T, N> chain(const Dual<T, N>& a, T value, T deriv) {
    Dual<T, N> r(value, {});
    for (int i = 0; i < N; ++i) r.d[i] = deriv * a.d[i];
    return r;
}
}  // namespace detail

template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
    using std::cos;
    using std::sin;
    return detail::chain(a, sin(a.v), cos(a.v));
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
    using std::cos;
    using std::sin;
    return detail::chain(a, cos(a.v), T(-1.0) * sin(a.v));
}
template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
    using std::sqrt;
    const T s = sqrt(a.v);
    return detail::chain(a, s, T(0.5) / s);
}
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
    using std::exp;
    const T e = exp(a.v);
    return detail::chain(a, e, e);
}

/// Strips the derivative parts of a (possibly nested) dual.
inline double value_of(double x) { return x; }
template <class T, int N>
double value_of(const Dual<T, N>& x) { return value_of(x.v); }

}  // namespace elscat
