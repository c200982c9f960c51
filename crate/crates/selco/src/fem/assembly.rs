//! Global assembly of element matrices/vectors over the free DoFs, with
//! fixed DoFs removed by row/column elimination.

use std::sync::Arc;

use crate::error::Result;
use crate::fem::element::{ElementKernel, ElementMatrix, ElementVector};
use crate::fem::material::Material;
use crate::linalg::{DofOrdering, SystemMatrix};
use crate::model::Mesh;

const FIXED: usize = usize::MAX;

/// Full-DoF to free-DoF index translation for a mesh.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// full DoF id -> free index, or FIXED
    to_free: Vec<usize>,
    /// free index -> full DoF id
    pub free_dofs: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let n_full = 2 * mesh.coords.len();
        let mut to_free = vec![FIXED; n_full];
        let mut free_dofs = Vec::with_capacity(n_full - mesh.fixed_dofs.len());
        for dof in 0..n_full {
            if !mesh.fixed_dofs.contains(&dof) {
                to_free[dof] = free_dofs.len();
                free_dofs.push(dof);
            }
        }
        DofMap { to_free, free_dofs }
    }

    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn free_index(&self, full_dof: usize) -> Option<usize> {
        let f = self.to_free[full_dof];
        (f != FIXED).then_some(f)
    }
}

/// Assembles element contributions into banded global systems.
///
/// Internally the free DoFs are renumbered along the shorter grid axis to
/// keep the bandwidth minimal; all public vectors use free-DoF ordering.
/// Summation runs in element order, so results are deterministic.
#[derive(Debug, Clone)]
pub struct GlobalAssembler {
    pub dof_map: DofMap,
    /// per element: free index (or FIXED) of each of the 8 local DoFs
    element_free: Vec<[usize; 8]>,
    order: Arc<DofOrdering>,
    band: usize,
}

impl GlobalAssembler {
    pub fn new(mesh: &Mesh) -> Self {
        let dof_map = DofMap::new(mesh);
        let n_free = dof_map.n_free();

        // Band-friendly node ranks: number along the shorter grid axis first.
        let nelx = mesh.space.nelx;
        let nely = mesh.space.nely;
        let nnx = nelx + 1;
        let nny = nely + 1;
        let mut ranks = vec![0usize; n_free];
        for (fi, &dof) in dof_map.free_dofs.iter().enumerate() {
            let node = dof / 2;
            let dir = dof % 2;
            let ix = node % nnx;
            let iy = node / nnx;
            let node_rank = if nny <= nnx { ix * nny + iy } else { iy * nnx + ix };
            ranks[fi] = 2 * node_rank + dir;
        }
        let order = Arc::new(DofOrdering::from_ranks(&ranks));

        let mut element_free = Vec::with_capacity(mesh.connectivity.len());
        let mut band = 0usize;
        for conn in &mesh.connectivity {
            let mut dofs = [FIXED; 8];
            for (a, &node) in conn.iter().enumerate() {
                for dir in 0..2 {
                    if let Some(fi) = dof_map.free_index(2 * node + dir) {
                        dofs[2 * a + dir] = fi;
                    }
                }
            }
            let rows: Vec<usize> = dofs
                .iter()
                .filter(|&&d| d != FIXED)
                .map(|&d| order.to_band[d])
                .collect();
            if let (Some(&lo), Some(&hi)) = (rows.iter().min(), rows.iter().max()) {
                band = band.max(hi - lo);
            }
            element_free.push(dofs);
        }

        GlobalAssembler {
            dof_map,
            element_free,
            order,
            band,
        }
    }

    pub fn n_free(&self) -> usize {
        self.dof_map.n_free()
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn new_matrix(&self) -> SystemMatrix {
        SystemMatrix::new(Arc::clone(&self.order), self.band)
    }

    /// K = sum_e scale[e] * mats[e], fixed DoFs eliminated.
    pub fn assemble_matrix(&self, scale: &[f64], mats: &[ElementMatrix]) -> SystemMatrix {
        assert_eq!(scale.len(), mats.len());
        let mut k = self.new_matrix();
        self.add_scaled_into(&mut k, scale, mats);
        k
    }

    pub fn add_scaled_into(&self, k: &mut SystemMatrix, scale: &[f64], mats: &[ElementMatrix]) {
        for (e, m) in mats.iter().enumerate() {
            let x = scale[e];
            if x == 0.0 {
                continue;
            }
            let dofs = &self.element_free[e];
            for i in 0..8 {
                if dofs[i] == FIXED {
                    continue;
                }
                for j in 0..=i {
                    if dofs[j] == FIXED {
                        continue;
                    }
                    k.add(dofs[i], dofs[j], x * m[(i, j)]);
                }
            }
        }
    }

    /// f = sum_e scale[e] * vecs[e] over free DoFs.
    pub fn assemble_vector(&self, scale: &[f64], vecs: &[ElementVector]) -> Vec<f64> {
        assert_eq!(scale.len(), vecs.len());
        let mut f = vec![0.0; self.n_free()];
        for (e, v) in vecs.iter().enumerate() {
            let x = scale[e];
            if x == 0.0 {
                continue;
            }
            let dofs = &self.element_free[e];
            for i in 0..8 {
                if dofs[i] != FIXED {
                    f[dofs[i]] += x * v[i];
                }
            }
        }
        f
    }

    /// Element-local displacement gathered from a free-DoF vector
    /// (fixed DoFs contribute zero).
    pub fn gather(&self, u_free: &[f64], element: usize) -> ElementVector {
        let mut u = ElementVector::zeros();
        let dofs = &self.element_free[element];
        for i in 0..8 {
            if dofs[i] != FIXED {
                u[i] = u_free[dofs[i]];
            }
        }
        u
    }

    /// v^T M v restricted to one element's DoFs.
    pub fn element_quadratic_form(&self, v_free: &[f64], element: usize, m: &ElementMatrix) -> f64 {
        let v = self.gather(v_free, element);
        (v.transpose() * m * v)[(0, 0)]
    }
}

/// Mesh, material, and element kernels; evaluates interpolated global
/// stiffness and internal forces at any deformation state for any density
/// vector.
pub struct ParameterizedStructure {
    pub mesh: Mesh,
    pub material: Material,
    pub kernels: Vec<ElementKernel>,
    pub assembler: GlobalAssembler,
    pub interp: crate::stabilize::InterpolationParams,
}

/// Per-element interpolated matrices and internal forces at one deformation
/// state, at unit density (the design variables scale them on assembly).
pub struct ElementStates {
    pub k: Vec<ElementMatrix>,
    pub f: Vec<ElementVector>,
}

impl ParameterizedStructure {
    pub fn new(
        mesh: Mesh,
        material: Material,
        interp: crate::stabilize::InterpolationParams,
    ) -> Result<Self> {
        let mut kernels = Vec::with_capacity(mesh.connectivity.len());
        for (e, conn) in mesh.connectivity.iter().enumerate() {
            let coords = [
                mesh.coords[conn[0]],
                mesh.coords[conn[1]],
                mesh.coords[conn[2]],
                mesh.coords[conn[3]],
            ];
            kernels.push(ElementKernel::new(
                e,
                coords,
                &material,
                mesh.space.thickness,
            )?);
        }
        let assembler = GlobalAssembler::new(&mesh);
        Ok(ParameterizedStructure {
            mesh,
            material,
            kernels,
            assembler,
            interp,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.kernels.len()
    }

    /// Interpolated per-element tangents and forces at displacement `u`
    /// (free ordering), blending nonlinear and linear models by the Heaviside
    /// weight of each density.
    pub fn element_states(&self, x: &[f64], u_free: &[f64]) -> Result<ElementStates> {
        let m = self.n_elements();
        assert_eq!(x.len(), m);
        let mut ks = Vec::with_capacity(m);
        let mut fs = Vec::with_capacity(m);
        for (e, kernel) in self.kernels.iter().enumerate() {
            let gamma = crate::stabilize::heaviside_weight(x[e], &self.interp);
            let u_e = self.assembler.gather(u_free, e);
            let (k, f) = if gamma == 0.0 {
                let kl = *kernel.linear_stiffness();
                (kl, kl * u_e)
            } else {
                let t = kernel.tangent(&u_e, &self.material)?;
                let kl = kernel.linear_stiffness();
                let fl = kl * u_e;
                crate::stabilize::interpolate_element(1.0, gamma, &t.k, kl, &t.f, &fl)
            };
            ks.push(k);
            fs.push(f);
        }
        Ok(ElementStates { k: ks, f: fs })
    }

    /// K(x) assembled from precomputed unit-density element matrices.
    pub fn assemble_stiffness(&self, x: &[f64], states: &ElementStates) -> SystemMatrix {
        self.assembler.assemble_matrix(x, &states.k)
    }

    /// Internal force vector f(x) over free DoFs.
    pub fn assemble_internal_force(&self, x: &[f64], states: &ElementStates) -> Vec<f64> {
        self.assembler.assemble_vector(x, &states.f)
    }

    /// Total interpolated strain energy at (x, u).
    pub fn total_energy(&self, x: &[f64], u_free: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (e, kernel) in self.kernels.iter().enumerate() {
            let gamma = crate::stabilize::heaviside_weight(x[e], &self.interp);
            let u_e = self.assembler.gather(u_free, e);
            let linear = 0.5 * (u_e.transpose() * kernel.linear_stiffness() * u_e)[(0, 0)];
            let energy = if gamma == 0.0 {
                linear
            } else {
                gamma * kernel.strain_energy(&u_e, &self.material)? + (1.0 - gamma) * linear
            };
            total += x[e] * energy;
        }
        Ok(total)
    }
}
