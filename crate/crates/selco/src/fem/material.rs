//! Compressible neo-Hookean material under plane stress.
//!
//! The strain energy `psi = lambda (J^2 - 1)/4 - (lambda/2 + mu) ln J
//! + mu (tr C - 3)/2` admits a closed-form out-of-plane stretch under the
//! zero-normal-stress condition, so stress and consistent tangent follow
//! directly from the in-plane right Cauchy-Green tensor without a local
//! iteration.

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};

/// Isotropic material with derived Lame parameters (MPa).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Material {
    pub fn new(e: f64, nu: f64) -> Result<Self> {
        let (lambda, mu) = lame(e, nu)?;
        Ok(Material { e, nu, lambda, mu })
    }
}

/// Lame parameters from modulus of elasticity and Poisson's ratio.
pub fn lame(e: f64, nu: f64) -> Result<(f64, f64)> {
    if e <= 0.0 {
        return Err(Error::InvalidParameter(
            "modulus of elasticity must be positive".into(),
        ));
    }
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::IncompressibleLimit { nu });
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

/// Plane-stress linear-elastic constitutive matrix, Voigt order (11, 22, 12)
/// with engineering shear.
pub fn linear_elastic_d(mat: &Material) -> Matrix3<f64> {
    let f = mat.e / (1.0 - mat.nu * mat.nu);
    Matrix3::new(
        f,
        f * mat.nu,
        0.0,
        f * mat.nu,
        f,
        0.0,
        0.0,
        0.0,
        f * (1.0 - mat.nu) / 2.0,
    )
}

/// Stress state and consistent tangent at one in-plane right Cauchy-Green
/// tensor under plane stress.
#[derive(Debug, Clone)]
pub struct PlaneStressState {
    /// out-of-plane stretch squared solving S33 = 0
    pub c33: f64,
    /// second Piola-Kirchhoff stress (S11, S22, S12), MPa
    pub s: Vector3<f64>,
    /// consistent material tangent dS/dE, Voigt (11, 22, 12), MPa
    pub d: Matrix3<f64>,
    /// strain energy density, MPa
    pub psi: f64,
}

/// Evaluates the neo-Hookean law at an in-plane `C`.
///
/// `C33 = (lambda/2 + mu) / (mu + (lambda/2) det C)` enforces the
/// zero-normal-stress condition exactly.
pub fn plane_stress_neo_hookean(c_hat: &Matrix2<f64>, mat: &Material) -> Result<PlaneStressState> {
    let (lambda, mu) = (mat.lambda, mat.mu);
    let det = c_hat[(0, 0)] * c_hat[(1, 1)] - c_hat[(0, 1)] * c_hat[(1, 0)];
    if det <= 0.0 {
        return Err(Error::InvertedState { element: None });
    }
    let c33 = (0.5 * lambda + mu) / (mu + 0.5 * lambda * det);
    if c33 <= 0.0 {
        return Err(Error::InvertedState { element: None });
    }
    let j2 = det * c33;
    let j = j2.sqrt();

    let inv_det = 1.0 / det;
    // inverse of the in-plane block
    let ci = Matrix2::new(
        c_hat[(1, 1)] * inv_det,
        -c_hat[(0, 1)] * inv_det,
        -c_hat[(1, 0)] * inv_det,
        c_hat[(0, 0)] * inv_det,
    );

    // S = a C^-1 + mu I with a = (lambda/2)(J^2 - 1) - mu
    let a = 0.5 * lambda * (j2 - 1.0) - mu;
    let s = Vector3::new(
        a * ci[(0, 0)] + mu,
        a * ci[(1, 1)] + mu,
        a * ci[(0, 1)],
    );

    // d a / d det, with J^2 = det * c33(det)
    let denom = mu + 0.5 * lambda * det;
    let a_prime = 0.5 * lambda * ((0.5 * lambda + mu) * mu / (denom * denom));

    // D_ijkl = 2 a' det Ci_ij Ci_kl - a (Ci_ik Ci_jl + Ci_il Ci_jk)
    let dd = |i: usize, jj: usize, k: usize, l: usize| -> f64 {
        2.0 * a_prime * det * ci[(i, jj)] * ci[(k, l)]
            - a * (ci[(i, k)] * ci[(jj, l)] + ci[(i, l)] * ci[(jj, k)])
    };
    let d = Matrix3::new(
        dd(0, 0, 0, 0),
        dd(0, 0, 1, 1),
        dd(0, 0, 0, 1),
        dd(1, 1, 0, 0),
        dd(1, 1, 1, 1),
        dd(1, 1, 0, 1),
        dd(0, 1, 0, 0),
        dd(0, 1, 1, 1),
        dd(0, 1, 0, 1),
    );

    let tr = c_hat[(0, 0)] + c_hat[(1, 1)] + c33;
    let psi = lambda * (j2 - 1.0) / 4.0 - (0.5 * lambda + mu) * j.ln() + 0.5 * mu * (tr - 3.0);

    Ok(PlaneStressState { c33, s, d, psi })
}
