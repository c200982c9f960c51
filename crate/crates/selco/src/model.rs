//! Design domain, regular quad mesh, boundary conditions, active/passive DoF
//! partition, and discretization of the desired deformation function into
//! stationary points.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Rectangular design domain filled with a regular grid of quad4 elements.
///
/// Units are mm throughout; `thickness` is 1 mm in all bundled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    pub width: f64,
    pub height: f64,
    pub nelx: usize,
    pub nely: usize,
    pub thickness: f64,
}

impl DesignSpace {
    pub fn new(width: f64, height: f64, nelx: usize, nely: usize, thickness: f64) -> Result<Self> {
        if width <= 0.0 || height <= 0.0 || thickness <= 0.0 {
            return Err(Error::InvalidParameter(
                "design space lengths must be positive".into(),
            ));
        }
        if nelx < 1 || nely < 1 {
            return Err(Error::InvalidParameter(
                "grid needs at least one element per direction".into(),
            ));
        }
        Ok(DesignSpace {
            width,
            height,
            nelx,
            nely,
            thickness,
        })
    }

    pub fn dx(&self) -> f64 {
        self.width / self.nelx as f64
    }

    pub fn dy(&self) -> f64 {
        self.height / self.nely_f()
    }

    fn nely_f(&self) -> f64 {
        self.nely as f64
    }

    pub fn n_nodes(&self) -> usize {
        (self.nelx + 1) * (self.nely + 1)
    }

    pub fn n_elements(&self) -> usize {
        self.nelx * self.nely
    }

    /// Row-major node numbering: x fastest, rows bottom-up.
    pub fn node_id(&self, ix: usize, iy: usize) -> usize {
        iy * (self.nelx + 1) + ix
    }

    /// Row-major element numbering: x fastest.
    pub fn element_id(&self, ex: usize, ey: usize) -> usize {
        ey * self.nelx + ex
    }

    pub fn element_grid_pos(&self, e: usize) -> (usize, usize) {
        (e % self.nelx, e / self.nelx)
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        let (ex, ey) = self.element_grid_pos(e);
        [
            (ex as f64 + 0.5) * self.dx(),
            (ey as f64 + 0.5) * self.dy(),
        ]
    }
}

/// Which DoF directions a boundary condition constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofSel {
    X,
    Y,
    Both,
}

/// Location on the domain boundary (or interior) selecting nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Point { x: f64, y: f64 },
    /// Straight segment; every grid node within snapping tolerance of it.
    Segment { x0: f64, y0: f64, x1: f64, y1: f64 },
}

/// One fixity: all selected node DoFs are prescribed to zero displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixity {
    pub region: Region,
    pub dofs: DofSel,
}

/// Regular quad4 mesh with resolved zero-displacement DoFs.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub space: DesignSpace,
    /// node id -> reference coordinates (mm)
    pub coords: Vec<[f64; 2]>,
    /// element -> node ids, counterclockwise
    pub connectivity: Vec<[usize; 4]>,
    /// full DoF ids (2*node + dir) with prescribed zero displacement
    pub fixed_dofs: BTreeSet<usize>,
    /// free-text note when the domain models half a symmetric structure
    pub symmetry: Option<String>,
}

fn dist_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Builds the regular grid and resolves fixities to DoF indices.
///
/// Locations snap to grid nodes within half an element side.
pub fn build_mesh(space: DesignSpace, fixities: &[Fixity]) -> Result<Mesh> {
    let nelx = space.nelx;
    let nely = space.nely;
    let dx = space.dx();
    let dy = space.dy();

    let mut coords = Vec::with_capacity(space.n_nodes());
    for iy in 0..=nely {
        for ix in 0..=nelx {
            coords.push([ix as f64 * dx, iy as f64 * dy]);
        }
    }

    let mut connectivity = Vec::with_capacity(space.n_elements());
    for ey in 0..nely {
        for ex in 0..nelx {
            connectivity.push([
                space.node_id(ex, ey),
                space.node_id(ex + 1, ey),
                space.node_id(ex + 1, ey + 1),
                space.node_id(ex, ey + 1),
            ]);
        }
    }

    let snap = 0.5 * dx.min(dy);
    let mut fixed_dofs = BTreeSet::new();
    for fixity in fixities {
        let nodes = select_nodes(&space, &coords, &fixity.region, snap)?;
        for node in nodes {
            match fixity.dofs {
                DofSel::X => {
                    fixed_dofs.insert(2 * node);
                }
                DofSel::Y => {
                    fixed_dofs.insert(2 * node + 1);
                }
                DofSel::Both => {
                    fixed_dofs.insert(2 * node);
                    fixed_dofs.insert(2 * node + 1);
                }
            }
        }
    }
    if fixed_dofs.is_empty() {
        return Err(Error::InvalidParameter(
            "structure is unsupported: no fixed DoFs resolved".into(),
        ));
    }

    Ok(Mesh {
        space,
        coords,
        connectivity,
        fixed_dofs,
        symmetry: None,
    })
}

fn select_nodes(
    space: &DesignSpace,
    coords: &[[f64; 2]],
    region: &Region,
    snap: f64,
) -> Result<Vec<usize>> {
    match *region {
        Region::Point { x, y } => {
            let node = nearest_node(space, x, y);
            let c = coords[node];
            let d = ((c[0] - x).powi(2) + (c[1] - y).powi(2)).sqrt();
            if d > snap {
                return Err(Error::FixityResolution { x, y });
            }
            Ok(vec![node])
        }
        Region::Segment { x0, y0, x1, y1 } => {
            let mut nodes = Vec::new();
            for (id, &c) in coords.iter().enumerate() {
                if dist_point_segment(c, [x0, y0], [x1, y1]) <= snap {
                    nodes.push(id);
                }
            }
            if nodes.is_empty() {
                return Err(Error::FixityResolution { x: x0, y: y0 });
            }
            Ok(nodes)
        }
    }
}

/// Nearest grid node to a physical location.
pub fn nearest_node(space: &DesignSpace, x: f64, y: f64) -> usize {
    let ix = ((x / space.dx()).round().max(0.0) as usize).min(space.nelx);
    let iy = ((y / space.dy()).round().max(0.0) as usize).min(space.nely);
    space.node_id(ix, iy)
}

/// Resolves a node location plus direction to a full DoF id.
pub fn resolve_dof(space: &DesignSpace, coords: &[[f64; 2]], x: f64, y: f64, dir: DofSel) -> Result<usize> {
    let node = nearest_node(space, x, y);
    let c = coords[node];
    let snap = 0.5 * space.dx().min(space.dy());
    let d = ((c[0] - x).powi(2) + (c[1] - y).powi(2)).sqrt();
    if d > snap {
        return Err(Error::FixityResolution { x, y });
    }
    match dir {
        DofSel::X => Ok(2 * node),
        DofSel::Y => Ok(2 * node + 1),
        DofSel::Both => Err(Error::InvalidParameter(
            "an active DoF needs a single direction".into(),
        )),
    }
}

/// Active/passive split of the free structural DoFs.
///
/// `active` keeps the user-specified order; it defines the component order of
/// `u_a` and of the desired tangent deformation modes.
#[derive(Debug, Clone)]
pub struct DofPartition {
    /// full DoF ids, ordered
    pub active: Vec<usize>,
    /// full DoF ids of the remaining free DoFs, ascending
    pub passive: Vec<usize>,
}

impl DofPartition {
    pub fn new(active: Vec<usize>, mesh: &Mesh) -> Result<Self> {
        if active.len() < 2 {
            return Err(Error::InvalidParameter(
                "at least two active DoFs are required".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for &a in &active {
            if a >= 2 * mesh.coords.len() {
                return Err(Error::InvalidParameter(format!(
                    "active DoF {a} out of range"
                )));
            }
            if mesh.fixed_dofs.contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "active DoF {a} is fixed by a boundary condition"
                )));
            }
            if !seen.insert(a) {
                return Err(Error::InvalidParameter(format!(
                    "active DoF {a} listed twice"
                )));
            }
        }
        let passive = (0..2 * mesh.coords.len())
            .filter(|d| !mesh.fixed_dofs.contains(d) && !seen.contains(d))
            .collect();
        Ok(DofPartition { active, passive })
    }

    pub fn q(&self) -> usize {
        self.active.len()
    }
}

/// One scalar component of the desired deformation function.
pub enum ComponentFn {
    /// coeffs[k] multiplies alpha^(k+1); no constant term by construction,
    /// so the undeformed state is always on the path.
    Poly(Vec<f64>),
    /// Arbitrary component; differentiated by central differences.
    Custom(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl ComponentFn {
    fn eval(&self, alpha: f64) -> f64 {
        match self {
            ComponentFn::Poly(coeffs) => {
                let mut acc = 0.0;
                let mut p = alpha;
                for &c in coeffs {
                    acc += c * p;
                    p *= alpha;
                }
                acc
            }
            ComponentFn::Custom(f) => f(alpha),
        }
    }

    fn derivative(&self, alpha: f64) -> f64 {
        match self {
            ComponentFn::Poly(coeffs) => {
                let mut acc = 0.0;
                let mut p = 1.0;
                for (k, &c) in coeffs.iter().enumerate() {
                    acc += c * (k as f64 + 1.0) * p;
                    p *= alpha;
                }
                acc
            }
            ComponentFn::Custom(f) => {
                let h = 1e-6 * alpha.abs().max(1.0);
                (f(alpha + h) - f(alpha - h)) / (2.0 * h)
            }
        }
    }
}

/// Parametric curve of active-DoF displacements defining the target kinematics.
pub struct DesiredDeformationFunction {
    pub components: Vec<ComponentFn>,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
}

impl DesiredDeformationFunction {
    pub fn new(components: Vec<ComponentFn>, alpha_lower: f64, alpha_upper: f64) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidParameter(
                "desired deformation function needs at least two components".into(),
            ));
        }
        if !(alpha_lower < alpha_upper) {
            return Err(Error::InvalidParameter(
                "empty path parameter domain".into(),
            ));
        }
        Ok(DesiredDeformationFunction {
            components,
            alpha_lower,
            alpha_upper,
        })
    }

    pub fn q(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, alpha: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(alpha)).collect()
    }

    pub fn derivative(&self, alpha: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.derivative(alpha)).collect()
    }
}

/// Prescribed active-DoF displacement plus unit desired tangent deformation
/// mode at one sample of the desired kinematics.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPoint {
    /// 1-based index within the discretized kinematics
    pub index: usize,
    /// prescribed active-DoF displacements (mm)
    pub u_a: Vec<f64>,
    /// unit-norm desired tangent deformation mode
    pub phi_bar: Vec<f64>,
}

impl StationaryPoint {
    /// Builds a stationary point from an explicit table entry, normalizing the
    /// tangent mode.
    pub fn from_table(index: usize, u_a: Vec<f64>, phi_bar: Vec<f64>) -> Result<Self> {
        if u_a.len() != phi_bar.len() {
            return Err(Error::InvalidParameter(
                "u_a and phi_bar must have equal length".into(),
            ));
        }
        let norm = phi_bar.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateTangent {
                alpha: f64::NAN,
                norm,
            });
        }
        Ok(StationaryPoint {
            index,
            u_a,
            phi_bar: phi_bar.iter().map(|v| v / norm).collect(),
        })
    }
}

/// Samples the desired deformation function at the given path parameters.
///
/// For each sample, `u_a` is the function value and `phi_bar` the normalized
/// derivative.
pub fn discretize_kinematics(
    f: &DesiredDeformationFunction,
    alphas: &[f64],
) -> Result<Vec<StationaryPoint>> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("no path samples given".into()));
    }
    for w in alphas.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "path samples must be strictly increasing".into(),
            ));
        }
    }
    let mut points = Vec::with_capacity(alphas.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        if alpha < f.alpha_lower || alpha > f.alpha_upper {
            return Err(Error::ParameterOutOfDomain {
                alpha,
                lower: f.alpha_lower,
                upper: f.alpha_upper,
            });
        }
        let u_a = f.eval(alpha);
        let d = f.derivative(alpha);
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateTangent { alpha, norm });
        }
        points.push(StationaryPoint {
            index: i + 1,
            u_a,
            phi_bar: d.iter().map(|v| v / norm).collect(),
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inverter_a() -> DesiredDeformationFunction {
        DesiredDeformationFunction::new(
            vec![ComponentFn::Poly(vec![1.0]), ComponentFn::Poly(vec![-1.0])],
            0.0,
            6.0,
        )
        .unwrap()
    }

    #[test]
    fn inverter_a_stationary_point() {
        let sps = discretize_kinematics(&inverter_a(), &[0.0, 2.0, 4.0, 6.0]).unwrap();
        assert_eq!(sps.len(), 4);
        assert_eq!(sps[1].u_a, vec![2.0, -2.0]);
        // All tangent modes identical for an affine path.
        for sp in &sps {
            assert!((sp.phi_bar[0] - 0.7071).abs() < 5e-5);
            assert!((sp.phi_bar[1] + 0.7071).abs() < 5e-5);
        }
        assert_eq!(sps[0].u_a, vec![0.0, 0.0]);
    }

    #[test]
    fn inverter_b_stationary_point() {
        // xi = (alpha, -alpha^2/4 - alpha)
        let f = DesiredDeformationFunction::new(
            vec![
                ComponentFn::Poly(vec![1.0]),
                ComponentFn::Poly(vec![-1.0, -0.25]),
            ],
            0.0,
            3.0,
        )
        .unwrap();
        let sps = discretize_kinematics(&f, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!((sps[1].u_a[0] - 1.0).abs() < 1e-12);
        assert!((sps[1].u_a[1] + 1.25).abs() < 1e-12);
        assert!((sps[1].phi_bar[0] - 0.5547).abs() < 5e-5);
        assert!((sps[1].phi_bar[1] + 0.8321).abs() < 5e-5);
        assert!((sps[2].phi_bar[0] - 0.4472).abs() < 5e-5);
        assert!((sps[3].phi_bar[1] + 0.9285).abs() < 5e-5);
    }

    #[test]
    fn custom_component_uses_central_difference() {
        let f = DesiredDeformationFunction::new(
            vec![
                ComponentFn::Custom(Box::new(|a| a.sin())),
                ComponentFn::Poly(vec![1.0]),
            ],
            -1.0,
            1.0,
        )
        .unwrap();
        let sps = discretize_kinematics(&f, &[0.5]).unwrap();
        let expect = [0.5_f64.cos(), 1.0];
        let norm = (expect[0] * expect[0] + expect[1] * expect[1]).sqrt();
        assert!((sps[0].phi_bar[0] - expect[0] / norm).abs() < 1e-8);
    }

    #[test]
    fn phi_bar_unit_norm_always() {
        let f = DesiredDeformationFunction::new(
            vec![
                ComponentFn::Poly(vec![3.0, -0.5, 0.1]),
                ComponentFn::Poly(vec![-2.0, 0.7]),
            ],
            0.0,
            2.0,
        )
        .unwrap();
        for sp in discretize_kinematics(&f, &[0.1, 0.7, 1.9]).unwrap() {
            let n: f64 = sp.phi_bar.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_tangent_detected() {
        // derivative (1 - alpha, 0) vanishes jointly with the other component at alpha=1
        let f = DesiredDeformationFunction::new(
            vec![
                ComponentFn::Poly(vec![1.0, -0.5]),
                ComponentFn::Poly(vec![1.0, -0.5]),
            ],
            0.0,
            2.0,
        )
        .unwrap();
        match discretize_kinematics(&f, &[1.0]) {
            Err(Error::DegenerateTangent { .. }) => {}
            other => panic!("expected degenerate tangent, got {other:?}"),
        }
    }

    #[test]
    fn out_of_domain_alpha_rejected() {
        match discretize_kinematics(&inverter_a(), &[0.0, 7.0]) {
            Err(Error::ParameterOutOfDomain { .. }) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn mesh_counts() {
        let space = DesignSpace::new(2.0, 1.0, 2, 1, 1.0).unwrap();
        let mesh = build_mesh(
            space,
            &[Fixity {
                region: Region::Point { x: 0.0, y: 0.0 },
                dofs: DofSel::Both,
            }],
        )
        .unwrap();
        assert_eq!(mesh.coords.len(), 6);
        assert_eq!(mesh.connectivity.len(), 2);
        assert_eq!(2 * mesh.coords.len(), 12);
    }

    #[test]
    fn large_grid_node_count() {
        let space = DesignSpace::new(200.0, 100.0, 200, 100, 1.0).unwrap();
        assert_eq!(space.n_nodes(), 201 * 101);
        assert_eq!(space.n_nodes(), 20301);
    }

    #[test]
    fn clamped_left_edge_fixes_six_dofs() {
        let space = DesignSpace::new(2.0, 2.0, 2, 2, 1.0).unwrap();
        let mesh = build_mesh(
            space,
            &[Fixity {
                region: Region::Segment {
                    x0: 0.0,
                    y0: 0.0,
                    x1: 0.0,
                    y1: 2.0,
                },
                dofs: DofSel::Both,
            }],
        )
        .unwrap();
        assert_eq!(mesh.fixed_dofs.len(), 6);
    }

    #[test]
    fn off_grid_fixity_rejected() {
        let space = DesignSpace::new(2.0, 2.0, 2, 2, 1.0).unwrap();
        let r = build_mesh(
            space,
            &[Fixity {
                region: Region::Point { x: 0.7, y: 0.7 },
                dofs: DofSel::Both,
            }],
        );
        match r {
            Err(Error::FixityResolution { .. }) => {}
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn connectivity_is_counterclockwise() {
        let space = DesignSpace::new(2.0, 1.0, 2, 1, 1.0).unwrap();
        let mesh = build_mesh(
            space,
            &[Fixity {
                region: Region::Point { x: 0.0, y: 0.0 },
                dofs: DofSel::Both,
            }],
        )
        .unwrap();
        for el in &mesh.connectivity {
            let c: Vec<[f64; 2]> = el.iter().map(|&n| mesh.coords[n]).collect();
            // shoelace area positive
            let mut area = 0.0;
            for i in 0..4 {
                let j = (i + 1) % 4;
                area += c[i][0] * c[j][1] - c[j][0] * c[i][1];
            }
            assert!(area > 0.0);
        }
    }

    #[test]
    fn partition_splits_free_dofs() {
        let space = DesignSpace::new(2.0, 1.0, 2, 1, 1.0).unwrap();
        let mesh = build_mesh(
            space,
            &[Fixity {
                region: Region::Segment {
                    x0: 0.0,
                    y0: 0.0,
                    x1: 0.0,
                    y1: 1.0,
                },
                dofs: DofSel::Both,
            }],
        )
        .unwrap();
        let active = vec![2 * 2, 2 * 2 + 1]; // both DoFs of node 2
        let part = DofPartition::new(active.clone(), &mesh).unwrap();
        assert_eq!(part.q(), 2);
        assert_eq!(part.active, active);
        let total = part.active.len() + part.passive.len() + mesh.fixed_dofs.len();
        assert_eq!(total, 12);
        for a in &part.active {
            assert!(!part.passive.contains(a));
        }
    }
}
