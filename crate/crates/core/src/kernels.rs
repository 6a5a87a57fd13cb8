//! Similarity functions over incomplete samples and Gram-matrix assembly.
//!
//! Two groups of kernels live here:
//!
//! * **Two-side masked kernels** ([`mpc`], [`mpp`], [`masked_poly`],
//!   [`masked_rbf`]) compare a pair of samples on their common observed
//!   support only.
//! * **Three-side kernels** ([`mpt_linear`], [`mpt_poly`], [`mpt_rbf`])
//!   compare a zero-padded left sample against a right training sample
//!   augmented with the centroid of its class, `x̃_j + z̃_q`. The right side
//!   is densified by the centroid, the left side is not, so the resulting
//!   Gram matrix is asymmetric in general even when left and right are the
//!   same set.
//!
//! A zero-norm argument never raises during bulk assembly. The base cosine
//! is taken as 0 (so poly kernels give `1`, RBF kernels give `0`) and the
//! event is counted in [`GramMatrix::degenerate`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centroids::{centroid_augment, Centroids, ClassCentroid};
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::masking::MaskedVector;

/// Norm guard used when a [`KernelSpec`] is not supplied.
pub const DEFAULT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Cosine,
    Mpc,
    Mpp,
    MptLinear,
    MptPoly,
    MptRbf,
    MaskedPoly,
    MaskedRbf,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 8] = [
        KernelFamily::Cosine,
        KernelFamily::Mpc,
        KernelFamily::Mpp,
        KernelFamily::MptLinear,
        KernelFamily::MptPoly,
        KernelFamily::MptRbf,
        KernelFamily::MaskedPoly,
        KernelFamily::MaskedRbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Cosine => "cosine",
            KernelFamily::Mpc => "mpc",
            KernelFamily::Mpp => "mpp",
            KernelFamily::MptLinear => "mpt-linear",
            KernelFamily::MptPoly => "mpt-poly",
            KernelFamily::MptRbf => "mpt-rbf",
            KernelFamily::MaskedPoly => "masked-poly",
            KernelFamily::MaskedRbf => "masked-rbf",
        }
    }

    /// Uses the class centroid of the right-hand sample.
    pub fn is_three_side(self) -> bool {
        matches!(
            self,
            KernelFamily::MptLinear | KernelFamily::MptPoly | KernelFamily::MptRbf
        )
    }

    /// Plain cosine-valued output in [−1, 1].
    pub fn is_cosine_valued(self) -> bool {
        matches!(
            self,
            KernelFamily::Cosine | KernelFamily::Mpc | KernelFamily::Mpp | KernelFamily::MptLinear
        )
    }

    pub fn is_rbf(self) -> bool {
        matches!(self, KernelFamily::MptRbf | KernelFamily::MaskedRbf)
    }

    pub fn is_poly(self) -> bool {
        matches!(self, KernelFamily::MptPoly | KernelFamily::MaskedPoly)
    }

    /// Families with an explicit finite feature map (usable in intrinsic space).
    pub fn has_finite_map(self) -> bool {
        matches!(self, KernelFamily::Cosine | KernelFamily::MptLinear)
    }

    fn shape(self) -> Shape {
        match self {
            KernelFamily::Cosine
            | KernelFamily::Mpc
            | KernelFamily::Mpp
            | KernelFamily::MptLinear => Shape::Linear,
            KernelFamily::MptPoly | KernelFamily::MaskedPoly => Shape::Poly,
            KernelFamily::MptRbf | KernelFamily::MaskedRbf => Shape::Rbf,
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        KernelFamily::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| {
                let known: Vec<_> = KernelFamily::ALL.iter().map(|k| k.name()).collect();
                Error::param("kernel", format!("unknown family `{s}`, expected one of {known:?}"))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Linear,
    Poly,
    Rbf,
}

/// Kernel family plus its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Polynomial order.
    pub p: u32,
    /// Kernel variance τ².
    pub tau2: f64,
    /// Norms below this are treated as zero.
    pub eps: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            family: KernelFamily::MptLinear,
            p: 3,
            tau2: 1.0,
            eps: DEFAULT_EPS,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        KernelSpec {
            family,
            ..KernelSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::param("p", "polynomial order must be at least 1"));
        }
        if !(self.tau2 > 0.0 && self.tau2.is_finite()) {
            return Err(Error::param("tau2", format!("{} must be positive", self.tau2)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::param("eps", format!("{} must be positive", self.eps)));
        }
        Ok(())
    }

    /// Kernel value for one pair. `left_centroid` is needed only by MPP,
    /// `right_centroid` by MPP and the three-side families.
    pub fn evaluate(
        &self,
        left: &MaskedVector,
        left_centroid: Option<&ClassCentroid>,
        right: &MaskedVector,
        right_centroid: Option<&ClassCentroid>,
    ) -> Result<Similarity> {
        self.validate()?;
        left.check_same_dim(right)?;
        let l = prepare(self, left, left_centroid, Side::Left)?;
        let r = prepare(self, right, right_centroid, Side::Right)?;
        Ok(combine(self, &l, &r))
    }
}

/// A kernel value plus whether a zero-norm guard fired while computing it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub value: f64,
    pub degenerate: bool,
}

/// Which argument slot a sample occupies. Three-side kernels treat the two
/// slots differently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A sample pre-processed for one argument slot.
#[derive(Clone, Debug)]
enum Prepared {
    /// Unit direction, or `None` when the norm fell below eps.
    Unit(Option<Vec<f64>>),
    /// Values compared on the common support with the other argument.
    Masked { values: Vec<f64>, mask: Vec<bool> },
}

/// `v / ‖v‖`, or `None` when `‖v‖ < eps`.
pub(crate) fn unit(v: &[f64], eps: f64) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm >= eps).then(|| v.iter().map(|x| x / norm).collect())
}

fn require<'a>(c: Option<&'a ClassCentroid>, what: &'static str) -> Result<&'a ClassCentroid> {
    c.ok_or(Error::PhaseMisuse(what))
}

fn prepare(
    spec: &KernelSpec,
    x: &MaskedVector,
    centroid: Option<&ClassCentroid>,
    side: Side,
) -> Result<Prepared> {
    use KernelFamily::*;
    Ok(match spec.family {
        Cosine => Prepared::Unit(unit(x.values(), spec.eps)),
        MptLinear | MptPoly | MptRbf => match side {
            Side::Left => Prepared::Unit(unit(x.values(), spec.eps)),
            Side::Right => {
                let z = require(centroid, "three-side kernel (right-hand class centroid)")?;
                Prepared::Unit(unit(&centroid_augment(x, z)?, spec.eps))
            }
        },
        Mpc | MaskedPoly | MaskedRbf => Prepared::Masked {
            values: x.values().to_vec(),
            mask: x.mask().to_vec(),
        },
        Mpp => {
            let z = require(centroid, "MPP (per-sample class centroid)")?;
            if z.dim() != x.dim() {
                return Err(Error::shape(z.dim(), x.dim()));
            }
            Prepared::Masked {
                values: x.values().iter().zip(&z.mean).map(|(v, m)| v - m).collect(),
                mask: x.mask().to_vec(),
            }
        }
    })
}

fn shaped(spec: &KernelSpec, base: f64, sq_dist: f64, degenerate: bool) -> Similarity {
    let value = match (spec.family.shape(), degenerate) {
        (Shape::Linear, true) => 0.0,
        (Shape::Linear, false) => base,
        (Shape::Poly, true) => 1.0,
        (Shape::Poly, false) => (1.0 + base / spec.tau2).powi(spec.p as i32),
        (Shape::Rbf, true) => 0.0,
        (Shape::Rbf, false) => (-sq_dist / (2.0 * spec.tau2)).exp(),
    };
    Similarity { value, degenerate }
}

fn combine(spec: &KernelSpec, l: &Prepared, r: &Prepared) -> Similarity {
    match (l, r) {
        (Prepared::Unit(Some(u)), Prepared::Unit(Some(v))) => {
            let mut dot = 0.0;
            let mut sq = 0.0;
            for (a, b) in u.iter().zip(v) {
                dot += a * b;
                sq += (a - b) * (a - b);
            }
            shaped(spec, dot, sq, false)
        }
        (Prepared::Unit(_), Prepared::Unit(_)) => shaped(spec, 0.0, 0.0, true),
        (
            Prepared::Masked { values: a, mask: ma },
            Prepared::Masked { values: b, mask: mb },
        ) => {
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for i in 0..a.len() {
                if ma[i] && mb[i] {
                    dot += a[i] * b[i];
                    na += a[i] * a[i];
                    nb += b[i] * b[i];
                }
            }
            let (na, nb) = (na.sqrt(), nb.sqrt());
            if na < spec.eps || nb < spec.eps {
                return shaped(spec, 0.0, 0.0, true);
            }
            let sq = if spec.family.is_rbf() {
                (0..a.len())
                    .filter(|&i| ma[i] && mb[i])
                    .map(|i| (a[i] / na - b[i] / nb).powi(2))
                    .sum()
            } else {
                0.0
            };
            shaped(spec, dot / (na * nb), sq, false)
        }
        _ => unreachable!("both slots are prepared by the same family"),
    }
}

fn pair(spec: KernelSpec, a: &MaskedVector, za: Option<&ClassCentroid>, b: &MaskedVector, zb: Option<&ClassCentroid>) -> Result<f64> {
    spec.evaluate(a, za, b, zb).map(|s| s.value)
}

fn spec_with(family: KernelFamily, p: u32, tau2: f64) -> KernelSpec {
    KernelSpec {
        family,
        p,
        tau2,
        eps: DEFAULT_EPS,
    }
}

/// `aᵀb / (‖a‖‖b‖)` on the zero-padded vectors, without any cross-masking.
pub fn cosine(a: &MaskedVector, b: &MaskedVector) -> Result<f64> {
    pair(KernelSpec::new(KernelFamily::Cosine), a, None, b, None)
}

/// Masked Partial-Cosine: cosine over the common observed support.
pub fn mpc(a: &MaskedVector, b: &MaskedVector) -> Result<f64> {
    pair(KernelSpec::new(KernelFamily::Mpc), a, None, b, None)
}

/// Masked Partial Pearson: cosine of the centroid-centred vectors over the
/// common support. Needs the class centroid of *both* samples, so it is
/// only usable where labels are known (training).
pub fn mpp(
    a: &MaskedVector,
    b: &MaskedVector,
    zr: Option<&ClassCentroid>,
    zq: Option<&ClassCentroid>,
) -> Result<f64> {
    require(zr, "MPP (left-hand class centroid)")?;
    pair(KernelSpec::new(KernelFamily::Mpp), a, zr, b, zq)
}

/// Masked Partial Three-Side Cosine:
/// `x̃_aᵀ(x̃_b + z̃_q) / (‖x̃_a‖ ‖x̃_b + z̃_q‖)`, where `zq` is the centroid
/// of `b`'s class. `a` may be a test sample of unknown class.
pub fn mpt_linear(a: &MaskedVector, b: &MaskedVector, zq: &ClassCentroid) -> Result<f64> {
    pair(KernelSpec::new(KernelFamily::MptLinear), a, None, b, Some(zq))
}

/// `(1 + mpt_linear / τ²)^p`.
pub fn mpt_poly(a: &MaskedVector, b: &MaskedVector, zq: &ClassCentroid, p: u32, tau2: f64) -> Result<f64> {
    pair(spec_with(KernelFamily::MptPoly, p, tau2), a, None, b, Some(zq))
}

/// `exp(−‖x̃_a/‖x̃_a‖ − (x̃_b+z̃_q)/‖x̃_b+z̃_q‖‖² / (2τ²))`.
pub fn mpt_rbf(a: &MaskedVector, b: &MaskedVector, zq: &ClassCentroid, tau2: f64) -> Result<f64> {
    pair(spec_with(KernelFamily::MptRbf, 3, tau2), a, None, b, Some(zq))
}

/// `(1 + mpc / τ²)^p`.
pub fn masked_poly(a: &MaskedVector, b: &MaskedVector, p: u32, tau2: f64) -> Result<f64> {
    pair(spec_with(KernelFamily::MaskedPoly, p, tau2), a, None, b, None)
}

/// RBF between the unit vectors of the double-masked pair.
pub fn masked_rbf(a: &MaskedVector, b: &MaskedVector, tau2: f64) -> Result<f64> {
    pair(spec_with(KernelFamily::MaskedRbf, 3, tau2), a, None, b, None)
}

/// Samples occupying one side of a Gram matrix. Labels are needed on the
/// right for three-side kernels and on both sides for MPP.
#[derive(Clone, Copy, Debug)]
pub struct SampleSet<'a> {
    pub vectors: &'a [MaskedVector],
    pub labels: Option<&'a [Label]>,
}

impl<'a> SampleSet<'a> {
    pub fn labeled(vectors: &'a [MaskedVector], labels: &'a [Label]) -> Self {
        SampleSet {
            vectors,
            labels: Some(labels),
        }
    }

    pub fn unlabeled(vectors: &'a [MaskedVector]) -> Self {
        SampleSet {
            vectors,
            labels: None,
        }
    }
}

/// Rectangular table of kernel values, rows = left samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    /// Entries where a zero-norm guard fired.
    pub degenerate: usize,
    pub spec: KernelSpec,
}

impl GramMatrix {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let k = &self.entries;
        k.is_square()
            && (0..k.nrows()).all(|i| (0..i).all(|j| (k[(i, j)] - k[(j, i)]).abs() <= tol))
    }
}

fn prepare_side(
    spec: &KernelSpec,
    set: &SampleSet<'_>,
    centroids: Option<&Centroids>,
    side: Side,
) -> Result<Vec<Prepared>> {
    let needs_centroid = match (spec.family, side) {
        (KernelFamily::Mpp, _) => true,
        (f, Side::Right) => f.is_three_side(),
        _ => false,
    };
    if let Some(labels) = set.labels {
        if labels.len() != set.vectors.len() {
            return Err(Error::shape(set.vectors.len(), labels.len()));
        }
    }
    set.vectors
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let centroid = if needs_centroid {
                let labels = match (set.labels, spec.family) {
                    (Some(l), _) => l,
                    (None, KernelFamily::Mpp) => {
                        return Err(Error::PhaseMisuse("MPP (class of every sample)"))
                    }
                    (None, family) => {
                        return Err(Error::Config(format!(
                            "{family} needs labels on the {side:?} side"
                        )))
                    }
                };
                let cs = centroids.ok_or_else(|| {
                    Error::Config(format!("{} needs class centroids", spec.family))
                })?;
                Some(cs.get(labels[i]))
            } else {
                None
            };
            prepare(spec, x, centroid, side)
        })
        .collect()
}

fn assemble(spec: &KernelSpec, left: &[Prepared], right: &[Prepared]) -> GramMatrix {
    let cols = right.len();
    let mut entries = vec![0.0; left.len() * cols];
    let degenerate: usize = entries
        .par_chunks_mut(cols.max(1))
        .zip(left.par_iter())
        .map(|(row, l)| {
            let mut bad = 0;
            for (slot, r) in row.iter_mut().zip(right) {
                let s = combine(spec, l, r);
                *slot = s.value;
                bad += usize::from(s.degenerate);
            }
            bad
        })
        .sum();
    GramMatrix {
        entries: DMatrix::from_row_slice(left.len(), cols, &entries),
        degenerate,
        spec: *spec,
    }
}

fn check_dims(sets: &[&SampleSet<'_>], centroids: Option<&Centroids>) -> Result<()> {
    let mut dim = None;
    for x in sets.iter().flat_map(|s| s.vectors.iter()) {
        match dim {
            None => dim = Some(x.dim()),
            Some(d) if d != x.dim() => return Err(Error::shape(d, x.dim())),
            _ => {}
        }
    }
    if let (Some(d), Some(c)) = (dim, centroids) {
        if c.dim() != d {
            return Err(Error::shape(d, c.dim()));
        }
    }
    Ok(())
}

/// `K[i][j] = k(left_i, right_j)` with the centroid of `right_j`'s class as
/// the third side. Rows are evaluated in parallel; each entry depends only
/// on its own pair, so the result does not depend on scheduling.
pub fn gram(
    left: SampleSet<'_>,
    right: SampleSet<'_>,
    centroids: Option<&Centroids>,
    spec: &KernelSpec,
) -> Result<GramMatrix> {
    spec.validate()?;
    check_dims(&[&left, &right], centroids)?;
    let l = prepare_side(spec, &left, centroids, Side::Left)?;
    let r = prepare_side(spec, &right, centroids, Side::Right)?;
    Ok(assemble(spec, &l, &r))
}

/// Training Gram where both slots use the right-hand (centroid-augmented)
/// preparation. For three-side families this is the symmetric matrix
/// `k(φ_R(x_i), φ_R(x_j))`; other families are already symmetric and are
/// returned unchanged.
pub fn right_symmetric_gram(
    train: SampleSet<'_>,
    centroids: Option<&Centroids>,
    spec: &KernelSpec,
) -> Result<GramMatrix> {
    spec.validate()?;
    check_dims(&[&train], centroids)?;
    let left_side = if spec.family.is_three_side() {
        Side::Right
    } else {
        Side::Left
    };
    let l = prepare_side(spec, &train, centroids, left_side)?;
    let r = prepare_side(spec, &train, centroids, Side::Right)?;
    Ok(assemble(spec, &l, &r))
}
