#pragma once

#include <vector>

namespace marle {

struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre on [a,b]
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Gauss-Jacobi for weight (1-x)^alpha (1+x)^beta on [-1,1]
Rule1D gauss_jacobi(int n, double alpha, double beta);

// trapezoid in s on [-asinh(L), asinh(L)] with x = sinh(s); endpoints included
Rule1D sinh_trapezoid(int n, double L);

// midpoint rule on [-L, L]
Rule1D uniform_midpoint(int n, double L);

// trapezoid in t with x = exp((pi/2) sinh t) covering [x_min, x_max]
Rule1D exp_sinh_trapezoid(int n, double x_min, double x_max);

} // namespace marle
