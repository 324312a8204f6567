//! Concave polyhedral losses `ℓ(x) = min_{h∈H} hᵀ[x;1]`, their symmetrized
//! lifts, conjugates, and the constraint blocks used by program assembly.

mod conjugate;
mod parametric;
pub mod polytope;
mod quadratic;

pub use conjugate::{
    conjugate_eval, conjugate_membership_blocks, emit_membership, MembershipBlocks,
};
pub use parametric::ParametricPolyhedralLoss;
pub use quadratic::QuadraticExampleLoss;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::combinatorics::enumerate_tuples;
use crate::conic::{solve_with, ConicProgram, Method, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

/// Description of the polytope `H ⊆ R^{nN+1}`; every row is `[a; b]`.
#[derive(Debug, Clone, PartialEq)]
pub enum LossPolytope<T> {
    Vertices(Vec<Vec<T>>),
    Halfspaces { w: Vec<Vec<T>>, g: Vec<T> },
}

/// A concave piecewise-affine loss on `N` blocks of dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralLoss<T = f64> {
    n: usize,
    arity: usize,
    polytope: LossPolytope<T>,
    vertices: Option<Vec<Vec<T>>>,
}

fn check_rows<T>(rows: &[Vec<T>], width: usize) -> Result<()> {
    for r in rows {
        if r.len() != width {
            return Err(Error::dim(width, r.len()));
        }
    }
    Ok(())
}

impl<T: Real> PolyhedralLoss<T> {
    /// Loss given by the vertex list `H` (rows `[a; b]`).
    pub fn from_vertices(n: usize, arity: usize, h: Vec<Vec<T>>) -> Result<Self> {
        if n == 0 || arity == 0 {
            return Err(Error::InvalidInput(
                "block dimension and arity must be positive".into(),
            ));
        }
        if h.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        check_rows(&h, n * arity + 1)?;
        if h.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex coordinate".into()));
        }
        Ok(PolyhedralLoss {
            n,
            arity,
            vertices: Some(h.clone()),
            polytope: LossPolytope::Vertices(h),
        })
    }

    /// Loss given by `H = {h : W h ≤ g}`. The polytope must be nonempty and bounded.
    pub fn from_halfspaces(n: usize, arity: usize, w: Vec<Vec<T>>, g: Vec<T>) -> Result<Self> {
        if n == 0 || arity == 0 {
            return Err(Error::InvalidInput(
                "block dimension and arity must be positive".into(),
            ));
        }
        if w.len() != g.len() {
            return Err(Error::dim(w.len(), g.len()));
        }
        check_rows(&w, n * arity + 1)?;
        polytope::check_bounded_nonempty(&w, &g)?;
        let vertices = polytope::halfspaces_to_vertices(&w, &g);
        Ok(PolyhedralLoss {
            n,
            arity,
            polytope: LossPolytope::Halfspaces { w, g },
            vertices,
        })
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Dimension `nN` of the loss argument.
    pub fn input_dim(&self) -> usize {
        self.n * self.arity
    }

    pub fn polytope(&self) -> &LossPolytope<T> {
        &self.polytope
    }

    /// Vertices of `H` when known (always for vertex input, for halfspace input
    /// when enumeration was within limits).
    pub fn vertices(&self) -> Option<&[Vec<T>]> {
        self.vertices.as_deref()
    }

    pub fn is_vertex_rep(&self) -> bool {
        matches!(self.polytope, LossPolytope::Vertices(_))
    }

    /// The same loss described by its vertices.
    pub fn to_vertex_rep(&self) -> Result<Self> {
        let v = self.vertices.clone().ok_or_else(|| {
            Error::cap(
                "vertex enumeration",
                "too many active sets",
                polytope::ENUMERATION_LIMIT,
            )
        })?;
        Self::from_vertices(self.n, self.arity, v)
    }

    /// The same loss described by inequalities.
    pub fn to_halfspace_rep(&self) -> Result<Self> {
        match &self.polytope {
            LossPolytope::Halfspaces { .. } => Ok(self.clone()),
            LossPolytope::Vertices(v) => {
                let (w, g) = polytope::vertices_to_halfspaces(v);
                Self::from_halfspaces(self.n, self.arity, w, g)
            }
        }
    }

    /// `ℓ(x) = min_{h∈H} hᵀ[x;1]`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        let d = self.input_dim();
        if x.len() != d {
            return Err(Error::dim(d, x.len()));
        }
        if let Some(vs) = &self.vertices {
            return Ok(vs
                .iter()
                .map(|h| dot(&h[..d], x) + h[d])
                .fold(T::infinity(), T::min));
        }
        let LossPolytope::Halfspaces { w, g } = &self.polytope else {
            unreachable!("vertex representation always caches its vertices")
        };
        let mut p = ConicProgram::new();
        for k in 0..=d {
            p.add_free();
            p.set_objective(k, if k < d { x[k] } else { T::one() });
        }
        for (row, &gi) in w.iter().zip(g) {
            p.add_le(row.iter().copied().enumerate().collect(), gi);
        }
        let r = solve_with(&p, &SolverSettings::default().method(Method::Simplex))?;
        match r.status {
            SolveStatus::Optimal => Ok(r.value),
            s => Err(Error::SolverFailure(format!(
                "loss evaluation LP ended with {s:?}"
            ))),
        }
    }

    /// Symmetrized lift to `M` blocks: the average of `ℓ(x_l)` over all
    /// non-repeating `N`-tuples `l` of block indices.
    pub fn eval_sym_lift(&self, m: usize, x: &[T], cap: usize) -> Result<T> {
        if x.len() != self.n * m {
            return Err(Error::dim(self.n * m, x.len()));
        }
        let mut err = None;
        let v = sym_lift(self.n, self.arity, m, x, cap, |y| match self.eval(y) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                T::nan()
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Largest dual norm of a vertex gradient block; for `μ` above this value
    /// every sup in the semi-infinite dual is attained.
    pub fn max_block_gradient_norm(&self, dual: crate::distributions::NormKind) -> Option<T> {
        let vs = self.vertices.as_ref()?;
        let n = self.n;
        Some(
            vs.iter()
                .flat_map(|h| (0..self.arity).map(move |j| dual.eval(&h[j * n..(j + 1) * n])))
                .fold(T::zero(), T::max),
        )
    }
}

/// Average of `f(x_l)` over all non-repeating `N`-tuples `l` from `{0..M}`,
/// where `x` holds `M` blocks of dimension `n`. Generic over the number type
/// so it can run in exact rational arithmetic.
pub fn sym_lift<X, F>(n: usize, arity: usize, m: usize, x: &[X], cap: usize, mut f: F) -> Result<X>
where
    X: Num + Clone + FromPrimitive,
    F: FnMut(&[X]) -> X,
{
    if x.len() != n * m {
        return Err(Error::dim(n * m, x.len()));
    }
    let tuples = enumerate_tuples(m, arity, cap)?;
    let mut acc = X::zero();
    let mut buf = Vec::with_capacity(n * arity);
    for l in tuples.iter() {
        buf.clear();
        for &j in l {
            buf.extend_from_slice(&x[j * n..(j + 1) * n]);
        }
        acc = acc + f(&buf);
    }
    let count = X::from_usize(tuples.len())
        .ok_or_else(|| Error::InvalidInput("tuple count not representable".into()))?;
    Ok(acc / count)
}

/// JSON form of a loss: `{"type":"vertices","H":…}` or
/// `{"type":"halfspaces","W":…,"g":…}`, optionally parametric through
/// `G`, `g0` and `theta_box`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", bound = "T: Real")]
pub enum LossSpec<T = f64> {
    Vertices {
        #[serde(rename = "H")]
        h: Vec<Vec<T>>,
    },
    Halfspaces {
        #[serde(rename = "W")]
        w: Vec<Vec<T>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<Vec<T>>,
        #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
        big_g: Option<Vec<Vec<T>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g0: Option<Vec<T>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_box: Option<Vec<[T; 2]>>,
    },
}

impl<T: Real> LossSpec<T> {
    pub fn is_parametric(&self) -> bool {
        matches!(self, LossSpec::Halfspaces { big_g: Some(_), .. })
    }

    /// Builds the fixed loss. Parametric specs are rejected here.
    pub fn to_loss(&self, n: usize, arity: usize) -> Result<PolyhedralLoss<T>> {
        match self {
            LossSpec::Vertices { h } => PolyhedralLoss::from_vertices(n, arity, h.clone()),
            LossSpec::Halfspaces {
                w,
                g: Some(g),
                big_g: None,
                ..
            } => PolyhedralLoss::from_halfspaces(n, arity, w.clone(), g.clone()),
            LossSpec::Halfspaces { big_g: Some(_), .. } => Err(Error::InvalidInput(
                "parametric loss needs a decision variable; use the outer program".into(),
            )),
            LossSpec::Halfspaces { g: None, .. } => {
                Err(Error::InvalidInput("halfspace loss without \"g\"".into()))
            }
        }
    }

    /// Builds the parametric loss `H(θ) = {h : W h ≤ Gθ + g0}`.
    pub fn to_parametric(&self, n: usize, arity: usize) -> Result<ParametricPolyhedralLoss<T>> {
        match self {
            LossSpec::Halfspaces {
                w,
                big_g: Some(big_g),
                g0,
                g,
                theta_box,
            } => {
                let g0 = g0
                    .clone()
                    .or_else(|| g.clone())
                    .ok_or_else(|| Error::InvalidInput("parametric loss without \"g0\"".into()))?;
                let boxes = theta_box
                    .clone()
                    .ok_or_else(|| {
                        Error::InvalidInput("parametric loss without \"theta_box\"".into())
                    })?
                    .into_iter()
                    .map(|[lo, hi]| (lo, hi))
                    .collect();
                ParametricPolyhedralLoss::new(n, arity, w.clone(), big_g.clone(), g0, boxes)
            }
            _ => Err(Error::InvalidInput("loss is not parametric".into())),
        }
    }
}

impl<T: Real> From<&PolyhedralLoss<T>> for LossSpec<T> {
    fn from(loss: &PolyhedralLoss<T>) -> Self {
        match &loss.polytope {
            LossPolytope::Vertices(h) => LossSpec::Vertices { h: h.clone() },
            LossPolytope::Halfspaces { w, g } => LossSpec::Halfspaces {
                w: w.clone(),
                g: Some(g.clone()),
                big_g: None,
                g0: None,
                theta_box: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::DEFAULT_VARIABLE_CAP;
    use proptest::prelude::*;

    fn two_plane() -> PolyhedralLoss {
        PolyhedralLoss::from_vertices(1, 2, vec![vec![2.0, 5.0, 0.0], vec![-5.0, 2.0, 0.0]])
            .unwrap()
    }

    fn outer_at(theta: f64) -> PolyhedralLoss {
        let w = vec![
            vec![1.0, 1.0, -1.0],
            vec![-1.0, 0.0, 0.0],
            vec![1.5, -0.5, -0.5],
            vec![0.0, 0.0, 1.0],
        ];
        let g = vec![1.0 - theta, theta, 0.5 - theta, theta];
        PolyhedralLoss::from_halfspaces(1, 2, w, g).unwrap()
    }

    #[test]
    fn eval_examples() {
        let l = two_plane();
        assert_eq!(l.eval(&[1.0, 1.0]).unwrap(), -3.0);
        assert_eq!(l.eval(&[1.0, 0.0]).unwrap(), -5.0);
        assert_eq!(l.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(l.eval(&[0.0]), Err(Error::dim(2, 1)));
    }

    #[test]
    fn sym_lift_examples() {
        let l = two_plane();
        assert_eq!(
            l.eval_sym_lift(2, &[1.0, 0.0], DEFAULT_VARIABLE_CAP)
                .unwrap(),
            -1.5
        );
        assert_eq!(
            l.eval_sym_lift(2, &[0.7, 0.7], DEFAULT_VARIABLE_CAP)
                .unwrap(),
            l.eval(&[0.7, 0.7]).unwrap()
        );
        let first: PolyhedralLoss =
            PolyhedralLoss::from_vertices(1, 2, vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let x = [0.3, -1.2, 4.0];
        let v = first.eval_sym_lift(3, &x, DEFAULT_VARIABLE_CAP).unwrap();
        assert!((v - (0.3 - 1.2 + 4.0) / 3.0).abs() < 1e-15);
        assert!(matches!(
            first.eval_sym_lift(3, &x, 5),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn halfspace_eval_matches_lp_fallback() {
        let l = outer_at(1.0);
        let mut no_vertices = l.clone();
        no_vertices.vertices = None;
        for x in [[0.3, -0.4], [2.0, 1.0], [-1.0, -3.0]] {
            let a = l.eval(&x).unwrap();
            let b = no_vertices.eval(&x).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn rejects_unbounded() {
        let w = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_eq!(
            PolyhedralLoss::from_halfspaces(1, 2, w, vec![1.0, 1.0, 1.0]),
            Err(Error::UnboundedPolytope)
        );
    }

    #[test]
    fn loss_json_round_trip() {
        let s = r#"{"type":"vertices","H":[[2,5,0],[-5,2,0]]}"#;
        let spec: LossSpec = serde_json::from_str(s).unwrap();
        assert_eq!(spec.to_loss(1, 2).unwrap(), two_plane());
        let back: LossSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let p = r#"{"type":"halfspaces","W":[[1,1,-1],[-1,0,0],[1.5,-0.5,-0.5],[0,0,1]],
                    "G":[[-1],[1],[-1],[1]],"g0":[1,0,0.5,0],"theta_box":[[-3,3]]}"#;
        let spec: LossSpec = serde_json::from_str(p).unwrap();
        assert!(spec.is_parametric());
        let pl = spec.to_parametric(1, 2).unwrap();
        assert_eq!(pl.at(&[1.0]).unwrap(), outer_at(1.0));
    }

    fn random_vertex_loss() -> impl Strategy<Value = PolyhedralLoss> {
        prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 3), 1..5)
            .prop_map(|h| PolyhedralLoss::from_vertices(1, 2, h).unwrap())
    }

    proptest! {
        #[test]
        fn concavity(l in random_vertex_loss(), x in prop::array::uniform2(-5.0..5.0f64),
                     y in prop::array::uniform2(-5.0..5.0f64), t in 0.0..1.0f64) {
            let mid = [t * x[0] + (1.0 - t) * y[0], t * x[1] + (1.0 - t) * y[1]];
            let lhs = l.eval(&mid).unwrap();
            let rhs = t * l.eval(&x).unwrap() + (1.0 - t) * l.eval(&y).unwrap();
            prop_assert!(lhs >= rhs - 1e-9);
        }

        #[test]
        fn permutation_invariance(l in random_vertex_loss(), x in prop::collection::vec(-5.0..5.0f64, 4),
                                  perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle()) {
            let px: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
            let a = l.eval_sym_lift(4, &x, 1000).unwrap();
            let b = l.eval_sym_lift(4, &px, 1000).unwrap();
            prop_assert!((a - b).abs() <= 1e-10);
        }

        #[test]
        fn representation_equivalence(theta in -0.6..3.0f64, x in prop::array::uniform2(-4.0..4.0f64)) {
            let l = outer_at(theta);
            let v = l.to_vertex_rep().unwrap();
            let h = v.to_halfspace_rep().unwrap();
            let a = l.eval(&x).unwrap();
            prop_assert!((a - v.eval(&x).unwrap()).abs() <= 1e-9);
            prop_assert!((a - h.eval(&x).unwrap()).abs() <= 1e-9);
        }
    }
}
