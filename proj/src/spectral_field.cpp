#include "coniso/spectral_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coniso {

SpectralField SpectralField::from_coefficients(std::shared_ptr<const SphereBasis> basis, Eigen::VectorXd coeff) {
    if (coeff.size() != basis->size()) throw std::invalid_argument("SpectralField: coefficient size mismatch");
    Eigen::VectorXd values = basis->synthesize(coeff);
    return SpectralField(std::move(basis), std::move(coeff), std::move(values));
}

SpectralField SpectralField::from_values(std::shared_ptr<const SphereBasis> basis, Eigen::VectorXd values) {
    if (values.size() != basis->grid().nodes()) throw std::invalid_argument("SpectralField: value size mismatch");
    Eigen::VectorXd coeff = basis->analyze(values);
    return SpectralField(std::move(basis), std::move(coeff), std::move(values));
}

SpectralField SpectralField::constant(std::shared_ptr<const SphereBasis> basis, double value) {
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis->size());
    coeff[0] = value * std::sqrt(4.0 * std::numbers::pi);
    return from_coefficients(std::move(basis), std::move(coeff));
}

SpectralField SpectralField::harmonic(std::shared_ptr<const SphereBasis> basis, int l, int k, double c) {
    if (l < 0 || l > basis->degree() || std::abs(k) > l)
        throw std::invalid_argument("SpectralField: harmonic index out of range");
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis->size());
    coeff[SphereBasis::index(l, k)] = c;
    return from_coefficients(std::move(basis), std::move(coeff));
}

double SpectralField::mean() const {
    return basis_->integrate(values_) / (4.0 * std::numbers::pi);
}

SpectralField SpectralField::operator+(const SpectralField& o) const {
    return SpectralField(basis_, coeff_ + o.coeff_, values_ + o.values_);
}

SpectralField SpectralField::operator-(const SpectralField& o) const {
    return SpectralField(basis_, coeff_ - o.coeff_, values_ - o.values_);
}

SpectralField SpectralField::scaled(double s) const {
    return SpectralField(basis_, coeff_ * s, values_ * s);
}

}  // namespace coniso
