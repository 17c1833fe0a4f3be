//! Fresnel reflection off a lossy dielectric half-space.

use num_complex::Complex;

use crate::scalar::{consts, Real};
use crate::scene::Material;

/// Complex relative permittivity ε_r − j·σ/(ω·ε₀) at `frequency` Hz.
pub fn complex_permittivity<T: Real>(m: &Material<T>, frequency: T) -> Complex<T> {
    let omega = T::TAU() * frequency;
    Complex::new(
        m.permittivity,
        -m.conductivity / (omega * T::lit(consts::EPSILON_0)),
    )
}

/// (Γ_s, Γ_p) for incidence from air at angle θ with `cos_theta = cos θ`.
pub fn reflection_coefficients<T: Real>(
    m: &Material<T>,
    cos_theta: T,
    frequency: T,
) -> (Complex<T>, Complex<T>) {
    let eps = complex_permittivity(m, frequency);
    let c = cos_theta.abs().min(T::one());
    let sin2 = T::one() - c * c;
    let root = (eps - Complex::new(sin2, T::zero())).sqrt();
    let cc = Complex::new(c, T::zero());
    let gs = (cc - root) / (cc + root);
    let gp = (eps * cc - root) / (eps * cc + root);
    (gs, gp)
}

/// Polarization-averaged power reflectance (|Γ_s|² + |Γ_p|²)/2.
pub fn power_reflectance<T: Real>(m: &Material<T>, cos_theta: T, frequency: T) -> T {
    let (gs, gp) = reflection_coefficients(m, cos_theta, frequency);
    (gs.norm_sqr() + gp.norm_sqr()) / T::lit(2.0)
}

/// Reflection loss in dB, −10·log10 of [`power_reflectance`].
pub fn reflection_loss_db<T: Real>(m: &Material<T>, cos_theta: T, frequency: T) -> T {
    -T::lit(10.0) * power_reflectance(m, cos_theta, frequency).log10()
}
