#pragma once

#include <cstdint>

#include "olsaudit/data.hpp"
#include "olsaudit/linalg.hpp"

namespace audit {

// Lower-bound certificate for the stability of the target coefficient,
// assembled from two spectral-norm constants:
//   c1 bounds the gradient envelope   (1/n)·Σᵢ ⟨Xᵢ,v⟩²rᵢ² ≤ c1²·⟨v,Σv⟩
//   c2 bounds the fourth moment       (1/n)·Σᵢ ⟨Xᵢ,v⟩⁴  ≤ c2²·⟨v,Σv⟩²
// over all directions v, where Σ = (1/n)·XᵀX and rᵢ = ⟨Xᵢ,β⟩ − yᵢ.
// Any removal of fewer than ceil(epsilon·n) rows keeps the target
// coefficient strictly positive.
struct SpectralCertificate {
    double c1 = 0.0;
    double c2 = 0.0;
    // Fraction with the squared denominator,
    //   epsilon = β_t² / (c1·√((Σ⁻¹)_tt) + c2·|β_t|)²,
    // the form whose soundness is actually established. The variant without
    // the outer square is reported alongside for transparency; it is not
    // used for the bound.
    double epsilon = 0.0;
    double epsilon_unsquared = 0.0;
    double beta_target = 0.0;
    int lower_bound = 0;
};

// Computes the certificate for ds. Throws SingularCovariance when the
// condition number of Σ exceeds 1e10. When the target coefficient is
// already ≤ 0 the constants are still computed but epsilon and the bound
// are 0 (nothing needs removing).
SpectralCertificate spectral_lower_bound(const Dataset& ds);

// Randomized check of the two envelope inequalities above: samples `trials`
// random unit directions and returns false if either inequality fails on
// any of them (beyond a small relative tolerance).
bool verify_envelope_constants(const Dataset& ds, double c1, double c2, int trials,
                               std::uint64_t seed = 13);

// The d²×d² whitening matrix applied to the fourth-moment column stack:
//   W = √(3/(2+d))·ΦΦᵀ/d + √(3/2)·(I − ΦΦᵀ/d),  Φ = vec(I_d).
// W is exactly (⅔·I + ⅓·ΦΦᵀ)^{−1/2}.
Matrix spectral_w_matrix(int d);

}  // namespace audit
