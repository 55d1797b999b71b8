#pragma once
#include <array>
#include <cmath>
#include <complex>

namespace moyal4 {

using cplx = std::complex<double>;

struct Vec4 {
    std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec4 operator+(const Vec4& o) const {
        return {{c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2], c[3] + o.c[3]}};
    }
    Vec4 operator-(const Vec4& o) const {
        return {{c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2], c[3] - o.c[3]}};
    }
    Vec4 operator-() const { return {{-c[0], -c[1], -c[2], -c[3]}}; }
    Vec4 operator*(double s) const { return {{s * c[0], s * c[1], s * c[2], s * c[3]}}; }
    Vec4& operator+=(const Vec4& o) {
        for (int i = 0; i < 4; ++i) c[i] += o.c[i];
        return *this;
    }

    double norm2() const { return c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]; }
    double norm() const { return std::sqrt(norm2()); }
};

// Noncommutativity matrix: antisymmetric blocks [[0,theta],[-theta,0]] on
// coordinates (0,1) and (2,3).  Theta^2 = -theta^2 * Id, |Theta k| = theta |k|.
struct ThetaMatrix {
    double theta = 1.0;

    Vec4 apply(const Vec4& k) const {
        return {{theta * k[1], -theta * k[0], theta * k[3], -theta * k[2]}};
    }
    // k Theta p
    double wedge(const Vec4& k, const Vec4& p) const {
        return theta * (k[0] * p[1] - k[1] * p[0] + k[2] * p[3] - k[3] * p[2]);
    }
};

} // namespace moyal4
