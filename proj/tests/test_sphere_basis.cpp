#include "coniso/sphere_basis.hpp"
#include "coniso/spectral_field.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace coniso;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(17, x, w);
    double total = 0.0, quartic = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        total += w[i];
        quartic += w[i] * std::pow(x[i], 4);
    }
    CHECK(std::abs(total - 2.0) < 1e-14);
    CHECK(quartic == doctest::Approx(2.0 / 5.0).epsilon(1e-14));
}

TEST_CASE("quadrature of the constant field equals 4 pi") {
    auto basis = make_basis(16);
    const auto one = SpectralField::constant(basis, 1.0);
    CHECK(basis->integrate(one.values()) == doctest::Approx(4.0 * kPi).epsilon(1e-13));
    CHECK(std::abs(basis->integrate(one.values()) - 4.0 * kPi) < 1e-12);
}

TEST_CASE("forward-then-inverse transform reproduces coefficients") {
    auto basis = make_basis(16);
    std::mt19937_64 rng(422);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd c(basis->size());
    for (int a = 0; a < c.size(); ++a) c[a] = gauss(rng);
    const Eigen::VectorXd back = basis->analyze(basis->synthesize(c));
    CHECK((back - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("basis is orthonormal under the grid quadrature") {
    auto basis = make_basis(8);
    const auto& T = basis->table(BasisDeriv::Value);
    Eigen::MatrixXd gram = T.transpose() * basis->weights().asDiagonal() * T;
    gram.diagonal().array() -= 1.0;
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("tabulated angular derivatives match finite differences of eval") {
    auto basis = make_basis(10);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd c(basis->size());
    for (int a = 0; a < c.size(); ++a) c[a] = gauss(rng);
    const auto f = SpectralField::from_coefficients(basis, c);

    const auto& grid = basis->grid();
    const Eigen::VectorXd ft = f.derivative_values(BasisDeriv::Theta);
    const Eigen::VectorXd fp = f.derivative_values(BasisDeriv::Phi);
    const Eigen::VectorXd ftt = f.derivative_values(BasisDeriv::ThetaTheta);
    const Eigen::VectorXd ftp = f.derivative_values(BasisDeriv::ThetaPhi);
    const Eigen::VectorXd fpp = f.derivative_values(BasisDeriv::PhiPhi);

    const double h = 1e-5;
    for (int node : {3, 57, 200, grid.nodes() - 5}) {
        const double th = grid.theta[grid.theta_index(node)];
        const double ph = grid.phi[grid.phi_index(node)];
        const double fd_t = (f.eval(th + h, ph) - f.eval(th - h, ph)) / (2 * h);
        const double fd_p = (f.eval(th, ph + h) - f.eval(th, ph - h)) / (2 * h);
        const double fd_tt = (f.eval(th + h, ph) - 2 * f.eval(th, ph) + f.eval(th - h, ph)) / (h * h);
        const double fd_pp = (f.eval(th, ph + h) - 2 * f.eval(th, ph) + f.eval(th, ph - h)) / (h * h);
        const double fd_tp = (f.eval(th + h, ph + h) - f.eval(th + h, ph - h) - f.eval(th - h, ph + h) +
                              f.eval(th - h, ph - h)) /
                             (4 * h * h);
        CHECK(ft[node] == doctest::Approx(fd_t).epsilon(1e-8));
        CHECK(fp[node] == doctest::Approx(fd_p).epsilon(1e-8));
        CHECK(ftt[node] == doctest::Approx(fd_tt).epsilon(1e-4));
        CHECK(ftp[node] == doctest::Approx(fd_tp).epsilon(1e-4));
        CHECK(fpp[node] == doctest::Approx(fd_pp).epsilon(1e-4));
    }
}

TEST_CASE("angular derivative tables satisfy the spherical Laplacian identity") {
    // Delta Y_{lk} = -l(l+1) Y_{lk} with Delta assembled from the raw tables.
    auto basis = make_basis(12);
    const auto& grid = basis->grid();
    for (auto [l, k] : {std::pair{1, 0}, {3, 2}, {7, -5}, {12, 12}}) {
        const int a = SphereBasis::index(l, k);
        for (int node = 0; node < grid.nodes(); node += 37) {
            const int it = grid.theta_index(node);
            const double st = grid.sin_theta[it], ct = grid.cos_theta[it];
            const double lap = basis->table(BasisDeriv::ThetaTheta)(node, a) +
                               (ct / st) * basis->table(BasisDeriv::Theta)(node, a) +
                               basis->table(BasisDeriv::PhiPhi)(node, a) / (st * st);
            const double expect = -l * (l + 1.0) * basis->table(BasisDeriv::Value)(node, a);
            CHECK(lap == doctest::Approx(expect).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("pointwise eval agrees with the grid tables") {
    auto basis = make_basis(9);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd c(basis->size());
    for (int a = 0; a < c.size(); ++a) c[a] = gauss(rng);
    const auto f = SpectralField::from_coefficients(basis, c);
    const auto& grid = basis->grid();
    for (int node : {0, 11, 101}) {
        const double th = grid.theta[grid.theta_index(node)];
        const double ph = grid.phi[grid.phi_index(node)];
        CHECK(f.eval(th, ph) == doctest::Approx(f.values()[node]).epsilon(1e-12));
    }
}
