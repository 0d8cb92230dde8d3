#pragma once

#include "coniso/sphere_basis.hpp"

#include <memory>

namespace coniso {

// Scalar field on the 2-sphere held both as truncated spherical-harmonic
// coefficients and as cached quadrature-grid values. Immutable after
// construction, so instances may be shared freely across threads.
//
// Built from coefficients, the cached values are the exact synthesis. Built
// from raw grid values, the coefficients are the quadrature projection and may
// be lossy for fields that are not band-limited; the raw values are kept.
class SpectralField {
public:
    static SpectralField from_coefficients(std::shared_ptr<const SphereBasis> basis, Eigen::VectorXd coeff);
    static SpectralField from_values(std::shared_ptr<const SphereBasis> basis, Eigen::VectorXd values);
    static SpectralField constant(std::shared_ptr<const SphereBasis> basis, double value);
    static SpectralField zero(std::shared_ptr<const SphereBasis> basis) { return constant(std::move(basis), 0.0); }
    // Single (l, k) mode with the given coefficient.
    static SpectralField harmonic(std::shared_ptr<const SphereBasis> basis, int l, int k, double coeff);

    const std::shared_ptr<const SphereBasis>& basis() const { return basis_; }
    int degree() const { return basis_->degree(); }
    const Eigen::VectorXd& coeff() const { return coeff_; }
    const Eigen::VectorXd& values() const { return values_; }

    // Grid values of angular derivatives of the band-limited representative.
    Eigen::VectorXd derivative_values(BasisDeriv which) const { return basis_->synthesize(coeff_, which); }

    double eval(double theta, double phi) const { return basis_->eval(coeff_, theta, phi); }
    double sup_norm() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }
    double mean() const;  // round-sphere average

    SpectralField operator+(const SpectralField& o) const;
    SpectralField operator-(const SpectralField& o) const;
    SpectralField scaled(double s) const;

private:
    SpectralField(std::shared_ptr<const SphereBasis> basis, Eigen::VectorXd coeff, Eigen::VectorXd values)
        : basis_(std::move(basis)), coeff_(std::move(coeff)), values_(std::move(values)) {}

    std::shared_ptr<const SphereBasis> basis_;
    Eigen::VectorXd coeff_;
    Eigen::VectorXd values_;
};

}  // namespace coniso
