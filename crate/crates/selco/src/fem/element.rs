//! Bilinear quadrilateral element kernels: cached linear stiffness and
//! total-Lagrangian tangent/internal force with 2x2 Gauss integration.

use nalgebra::{Matrix2, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};
use crate::fem::material::{linear_elastic_d, plane_stress_neo_hookean, Material};

pub type ElementMatrix = SMatrix<f64, 8, 8>;
pub type ElementVector = SVector<f64, 8>;

const GAUSS: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// Natural coordinates of the corner nodes, counterclockwise.
const XI_NODE: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// 2x2 full integration abscissae (weights are all 1).
const GAUSS_POINTS: [[f64; 2]; 4] = [
    [-GAUSS, -GAUSS],
    [GAUSS, -GAUSS],
    [GAUSS, GAUSS],
    [-GAUSS, GAUSS],
];

#[derive(Debug, Clone)]
struct GaussData {
    /// shape function gradients w.r.t. reference coordinates, per node
    dndx: [[f64; 2]; 4],
    /// det(J) * gauss weight * thickness
    weight: f64,
}

/// Per-element reference data: Gauss quadrature, constant distortion-
/// displacement matrix, and the cached linear stiffness.
#[derive(Debug, Clone)]
pub struct ElementKernel {
    pub id: usize,
    pub coords: [[f64; 2]; 4],
    gauss: [GaussData; 4],
    b_l0: [SMatrix<f64, 3, 8>; 4],
    k_linear: ElementMatrix,
}

fn shape_gradients_natural(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut g = [[0.0; 2]; 4];
    for a in 0..4 {
        let [xa, ea] = XI_NODE[a];
        g[a][0] = 0.25 * xa * (1.0 + ea * eta);
        g[a][1] = 0.25 * ea * (1.0 + xa * xi);
    }
    g
}

impl ElementKernel {
    pub fn new(id: usize, coords: [[f64; 2]; 4], mat: &Material, thickness: f64) -> Result<Self> {
        let d_lin = linear_elastic_d(mat);
        let mut gauss = Vec::with_capacity(4);
        let mut b_l0 = Vec::with_capacity(4);
        let mut k_linear = ElementMatrix::zeros();

        for gp in GAUSS_POINTS {
            let gn = shape_gradients_natural(gp[0], gp[1]);
            // Jacobian of the isoparametric map
            let mut j = Matrix2::zeros();
            for a in 0..4 {
                j[(0, 0)] += gn[a][0] * coords[a][0];
                j[(0, 1)] += gn[a][0] * coords[a][1];
                j[(1, 0)] += gn[a][1] * coords[a][0];
                j[(1, 1)] += gn[a][1] * coords[a][1];
            }
            let det = j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)];
            if det <= 0.0 {
                return Err(Error::ElementGeometry { element: id });
            }
            let jinv = Matrix2::new(j[(1, 1)], -j[(0, 1)], -j[(1, 0)], j[(0, 0)]) / det;
            let mut dndx = [[0.0; 2]; 4];
            for a in 0..4 {
                dndx[a][0] = jinv[(0, 0)] * gn[a][0] + jinv[(0, 1)] * gn[a][1];
                dndx[a][1] = jinv[(1, 0)] * gn[a][0] + jinv[(1, 1)] * gn[a][1];
            }
            let weight = det * thickness;

            let mut b = SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                b[(0, 2 * a)] = dndx[a][0];
                b[(1, 2 * a + 1)] = dndx[a][1];
                b[(2, 2 * a)] = dndx[a][1];
                b[(2, 2 * a + 1)] = dndx[a][0];
            }
            k_linear += weight * b.transpose() * d_lin * b;

            gauss.push(GaussData { dndx, weight });
            b_l0.push(b);
        }

        k_linear = (k_linear + k_linear.transpose()) * 0.5;

        Ok(ElementKernel {
            id,
            coords,
            gauss: gauss.try_into().unwrap(),
            b_l0: b_l0.try_into().unwrap(),
            k_linear,
        })
    }

    pub fn linear_stiffness(&self) -> &ElementMatrix {
        &self.k_linear
    }

    pub fn b_l0(&self, gp: usize) -> &SMatrix<f64, 3, 8> {
        &self.b_l0[gp]
    }

    /// Total-Lagrangian tangent stiffness, internal force, and per-point
    /// stress state at the element displacement `u`.
    pub fn tangent(&self, u: &ElementVector, mat: &Material) -> Result<ElementTangent> {
        let mut k = ElementMatrix::zeros();
        let mut f = ElementVector::zeros();
        let mut gp_stress = [Vector3::zeros(); 4];
        let mut gp_c = [Matrix2::zeros(); 4];

        for (gp, gd) in self.gauss.iter().enumerate() {
            // displacement gradient H = du/dX
            let mut h = Matrix2::zeros();
            for a in 0..4 {
                let ux = u[2 * a];
                let uy = u[2 * a + 1];
                h[(0, 0)] += ux * gd.dndx[a][0];
                h[(0, 1)] += ux * gd.dndx[a][1];
                h[(1, 0)] += uy * gd.dndx[a][0];
                h[(1, 1)] += uy * gd.dndx[a][1];
            }
            let fdef = Matrix2::identity() + h;
            if fdef.determinant() <= 0.0 {
                return Err(Error::InvertedState {
                    element: Some(self.id),
                });
            }
            let c = fdef.transpose() * fdef;
            let ps = plane_stress_neo_hookean(&c, mat).map_err(|e| match e {
                Error::InvertedState { .. } => Error::InvertedState {
                    element: Some(self.id),
                },
                other => other,
            })?;

            // current strain-displacement matrix
            let mut b_l = SMatrix::<f64, 3, 8>::zeros();
            for a in 0..4 {
                let dx = gd.dndx[a][0];
                let dy = gd.dndx[a][1];
                b_l[(0, 2 * a)] = fdef[(0, 0)] * dx;
                b_l[(0, 2 * a + 1)] = fdef[(1, 0)] * dx;
                b_l[(1, 2 * a)] = fdef[(0, 1)] * dy;
                b_l[(1, 2 * a + 1)] = fdef[(1, 1)] * dy;
                b_l[(2, 2 * a)] = fdef[(0, 0)] * dy + fdef[(0, 1)] * dx;
                b_l[(2, 2 * a + 1)] = fdef[(1, 0)] * dy + fdef[(1, 1)] * dx;
            }

            k += gd.weight * b_l.transpose() * ps.d * b_l;

            // geometric part via the stress matrix
            let s11 = ps.s[0];
            let s22 = ps.s[1];
            let s12 = ps.s[2];
            // B_NL rows: [dux/dX, dux/dY, duy/dX, duy/dY]
            let mut b_nl = SMatrix::<f64, 4, 8>::zeros();
            for a in 0..4 {
                b_nl[(0, 2 * a)] = gd.dndx[a][0];
                b_nl[(1, 2 * a)] = gd.dndx[a][1];
                b_nl[(2, 2 * a + 1)] = gd.dndx[a][0];
                b_nl[(3, 2 * a + 1)] = gd.dndx[a][1];
            }
            let s_hat = SMatrix::<f64, 4, 4>::new(
                s11, s12, 0.0, 0.0, //
                s12, s22, 0.0, 0.0, //
                0.0, 0.0, s11, s12, //
                0.0, 0.0, s12, s22,
            );
            k += gd.weight * b_nl.transpose() * s_hat * b_nl;

            f += gd.weight * b_l.transpose() * ps.s;
            gp_stress[gp] = ps.s;
            gp_c[gp] = c;
        }

        k = (k + k.transpose()) * 0.5;

        Ok(ElementTangent {
            k,
            f,
            gp_stress,
            gp_c,
        })
    }

    /// Neo-Hookean strain energy of the element at displacement `u`.
    pub fn strain_energy(&self, u: &ElementVector, mat: &Material) -> Result<f64> {
        let mut energy = 0.0;
        for gd in &self.gauss {
            let mut h = Matrix2::zeros();
            for a in 0..4 {
                h[(0, 0)] += u[2 * a] * gd.dndx[a][0];
                h[(0, 1)] += u[2 * a] * gd.dndx[a][1];
                h[(1, 0)] += u[2 * a + 1] * gd.dndx[a][0];
                h[(1, 1)] += u[2 * a + 1] * gd.dndx[a][1];
            }
            let fdef = Matrix2::identity() + h;
            if fdef.determinant() <= 0.0 {
                return Err(Error::InvertedState {
                    element: Some(self.id),
                });
            }
            let c = fdef.transpose() * fdef;
            energy += gd.weight * plane_stress_neo_hookean(&c, mat)?.psi;
        }
        Ok(energy)
    }
}

/// Tangent state of one element at a given displacement.
#[derive(Debug, Clone)]
pub struct ElementTangent {
    pub k: ElementMatrix,
    pub f: ElementVector,
    /// second Piola-Kirchhoff stress (S11, S22, S12) per Gauss point
    pub gp_stress: [Vector3<f64>; 4],
    /// right Cauchy-Green tensor per Gauss point
    pub gp_c: [Matrix2<f64>; 4],
}
