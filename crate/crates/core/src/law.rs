//! Parametric scaling-law families: evaluation, analytic parameter Jacobians,
//! parameter metadata, and experiment cost models.
//!
//! All operations here are pure; values are freely shareable across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One experiment configuration: a vector of real covariates
/// (e.g. model size N, token count D, learning rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfigPoint {
    pub coords: Vec<f64>,
}

impl ConfigPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

/// A value of the law's parameter vector; one entry per declared parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector {
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry lies inside its bound and positivity flag.
    pub fn satisfies(&self, spec: &LawSpec) -> bool {
        self.len() == spec.param_count()
            && self.values.iter().zip(&spec.bounds).zip(&spec.positive_flags).all(
                |((&v, &(lo, hi)), &pos)| v.is_finite() && v >= lo && v <= hi && (!pos || v > 0.0),
            )
    }
}

/// Registered law families. The registry is addressable by the `family_id`
/// string used in instance files (`power_sum`, `log_quadratic`,
/// `saturating_power`, `linear`); adding a family means adding a variant here
/// plus its evaluator and Jacobian below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyId {
    /// `L = E + sum_i A_i * x_i^(-alpha_i)` over d <= 4 covariates.
    /// Covers Chinchilla-style and vocabulary-style shapes.
    PowerSum,
    /// `log L = c0 + sum_i c_i u_i + sum_{i<=j} c_ij u_i u_j` with `u = log x`.
    /// Covers hyperparameter response surfaces.
    LogQuadratic,
    /// `L = E + A * (x_1 + k)^(-alpha)`.
    SaturatingPower,
    /// `L = b0 + sum_i b_i x_i`; linear in the parameters.
    Linear,
}

impl FamilyId {
    pub fn id(&self) -> &'static str {
        match self {
            FamilyId::PowerSum => "power_sum",
            FamilyId::LogQuadratic => "log_quadratic",
            FamilyId::SaturatingPower => "saturating_power",
            FamilyId::Linear => "linear",
        }
    }

    pub fn from_id(s: &str) -> Option<FamilyId> {
        match s {
            "power_sum" => Some(FamilyId::PowerSum),
            "log_quadratic" => Some(FamilyId::LogQuadratic),
            "saturating_power" => Some(FamilyId::SaturatingPower),
            "linear" => Some(FamilyId::Linear),
            _ => None,
        }
    }

    /// Parameter count implied by the input dimension.
    pub fn param_count(&self, input_dim: usize) -> usize {
        match self {
            FamilyId::PowerSum => 1 + 2 * input_dim,
            FamilyId::LogQuadratic => 1 + input_dim + input_dim * (input_dim + 1) / 2,
            FamilyId::SaturatingPower => 4,
            FamilyId::Linear => 1 + input_dim,
        }
    }

    pub fn dim_ok(&self, input_dim: usize) -> bool {
        match self {
            FamilyId::PowerSum => (1..=4).contains(&input_dim),
            FamilyId::LogQuadratic => (1..=8).contains(&input_dim),
            FamilyId::SaturatingPower => input_dim == 1,
            FamilyId::Linear => input_dim >= 1,
        }
    }
}

/// Default bound for amplitude/exponent-like (positive) parameters.
pub const POSITIVE_BOUNDS: (f64, f64) = (1e-6, 1e6);
/// Default bound for signed offset-like parameters.
pub const OFFSET_BOUNDS: (f64, f64) = (-1e3, 1e3);

/// A law family instantiated with parameter metadata: names, box bounds, and
/// positivity flags (positive parameters get log-scale sensitivity downstream).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    pub family_id: FamilyId,
    pub param_names: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    pub positive_flags: Vec<bool>,
    pub input_dim: usize,
}

impl LawSpec {
    pub fn param_count(&self) -> usize {
        self.param_names.len()
    }

    /// Power-sum family over `input_dim` covariates with default metadata.
    pub fn power_sum(input_dim: usize) -> Self {
        let mut names = vec!["E".to_string()];
        let mut bounds = vec![OFFSET_BOUNDS];
        let mut flags = vec![false];
        for i in 0..input_dim {
            names.push(format!("A{}", i + 1));
            bounds.push(POSITIVE_BOUNDS);
            flags.push(true);
        }
        for i in 0..input_dim {
            names.push(format!("alpha{}", i + 1));
            bounds.push(POSITIVE_BOUNDS);
            flags.push(true);
        }
        LawSpec {
            family_id: FamilyId::PowerSum,
            param_names: names,
            bounds,
            positive_flags: flags,
            input_dim,
        }
    }

    /// Log-space quadratic interaction surface over `input_dim` covariates.
    pub fn log_quadratic(input_dim: usize) -> Self {
        let mut names = vec!["c0".to_string()];
        for i in 0..input_dim {
            names.push(format!("c{}", i + 1));
        }
        for i in 0..input_dim {
            for j in i..input_dim {
                names.push(format!("c{}{}", i + 1, j + 1));
            }
        }
        let p = names.len();
        LawSpec {
            family_id: FamilyId::LogQuadratic,
            param_names: names,
            bounds: vec![OFFSET_BOUNDS; p],
            positive_flags: vec![false; p],
            input_dim,
        }
    }

    /// Saturating power law `E + A (x + k)^(-alpha)` on one covariate.
    pub fn saturating_power() -> Self {
        LawSpec {
            family_id: FamilyId::SaturatingPower,
            param_names: ["E", "A", "k", "alpha"].iter().map(|s| s.to_string()).collect(),
            bounds: vec![OFFSET_BOUNDS, POSITIVE_BOUNDS, POSITIVE_BOUNDS, POSITIVE_BOUNDS],
            positive_flags: vec![false, true, true, true],
            input_dim: 1,
        }
    }

    /// Linear-in-parameters law over `input_dim` covariates.
    pub fn linear(input_dim: usize) -> Self {
        let mut names = vec!["b0".to_string()];
        for i in 0..input_dim {
            names.push(format!("b{}", i + 1));
        }
        let p = names.len();
        LawSpec {
            family_id: FamilyId::Linear,
            param_names: names,
            bounds: vec![OFFSET_BOUNDS; p],
            positive_flags: vec![false; p],
            input_dim,
        }
    }

    /// Replace the default bounds; lengths must match the parameter count.
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.param_count();
        if p == 0 {
            return Err(Error::Spec("parameter count must be >= 1".into()));
        }
        if !self.family_id.dim_ok(self.input_dim) {
            return Err(Error::Spec(format!(
                "family {} does not accept input_dim {}",
                self.family_id.id(),
                self.input_dim
            )));
        }
        let expected = self.family_id.param_count(self.input_dim);
        if p != expected {
            return Err(Error::Spec(format!(
                "family {} with input_dim {} needs {} parameters, got {}",
                self.family_id.id(),
                self.input_dim,
                expected,
                p
            )));
        }
        if self.bounds.len() != p || self.positive_flags.len() != p {
            return Err(Error::Spec("bounds/positive_flags length mismatch".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Spec(format!(
                    "parameter {}: bound [{lo}, {hi}] must be finite with lo < hi",
                    self.param_names[i]
                )));
            }
            if self.positive_flags[i] && lo <= 0.0 {
                return Err(Error::Spec(format!(
                    "parameter {}: positive flag requires lower bound > 0",
                    self.param_names[i]
                )));
            }
        }
        Ok(())
    }

    fn check_point(&self, x: &ConfigPoint) -> Result<()> {
        if x.dim() != self.input_dim {
            return Err(Error::Spec(format!(
                "config point has {} coords, law expects {}",
                x.dim(),
                self.input_dim
            )));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("config point coordinates".into()));
        }
        Ok(())
    }
}

fn positive_coord(family: &'static str, i: usize, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain {
            family,
            message: format!("coordinate {i} must be > 0, got {v}"),
        })
    }
}

/// Evaluates `f(x; theta)` for the spec's family. Pure and deterministic.
pub fn evaluate(spec: &LawSpec, theta: &ParamVector, x: &ConfigPoint) -> Result<f64> {
    spec.check_point(x)?;
    let t = &theta.values;
    if t.len() != spec.param_count() {
        return Err(Error::Spec(format!(
            "theta has {} entries, law expects {}",
            t.len(),
            spec.param_count()
        )));
    }
    let d = spec.input_dim;
    let value = match spec.family_id {
        FamilyId::PowerSum => {
            let mut acc = t[0];
            for i in 0..d {
                let xi = positive_coord("power_sum", i, x.coords[i])?;
                acc += t[1 + i] * xi.powf(-t[1 + d + i]);
            }
            acc
        }
        FamilyId::LogQuadratic => {
            let u = log_coords("log_quadratic", x)?;
            (log_quadratic_exponent(t, &u)).exp()
        }
        FamilyId::SaturatingPower => {
            let shifted = x.coords[0] + t[2];
            if shifted <= 0.0 {
                return Err(Error::Domain {
                    family: "saturating_power",
                    message: format!("x + k = {shifted} must be > 0"),
                });
            }
            t[0] + t[1] * shifted.powf(-t[3])
        }
        FamilyId::Linear => {
            let mut acc = t[0];
            for i in 0..d {
                acc += t[1 + i] * x.coords[i];
            }
            acc
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(format!("{} evaluation", spec.family_id.id())))
    }
}

fn log_coords(family: &'static str, x: &ConfigPoint) -> Result<Vec<f64>> {
    x.coords
        .iter()
        .enumerate()
        .map(|(i, &v)| positive_coord(family, i, v).map(f64::ln))
        .collect()
}

fn log_quadratic_exponent(t: &[f64], u: &[f64]) -> f64 {
    let d = u.len();
    let mut q = t[0];
    for i in 0..d {
        q += t[1 + i] * u[i];
    }
    let mut idx = 1 + d;
    for i in 0..d {
        for j in i..d {
            q += t[idx] * u[i] * u[j];
            idx += 1;
        }
    }
    q
}

/// Analytic Jacobian `df/dtheta` evaluated at `theta`.
pub fn param_jacobian(spec: &LawSpec, theta: &ParamVector, x: &ConfigPoint) -> Result<Vec<f64>> {
    spec.check_point(x)?;
    let t = &theta.values;
    let p = spec.param_count();
    if t.len() != p {
        return Err(Error::Spec(format!("theta has {} entries, law expects {p}", t.len())));
    }
    let d = spec.input_dim;
    let mut g = vec![0.0; p];
    match spec.family_id {
        FamilyId::PowerSum => {
            g[0] = 1.0;
            for i in 0..d {
                let xi = positive_coord("power_sum", i, x.coords[i])?;
                let pw = xi.powf(-t[1 + d + i]);
                g[1 + i] = pw;
                g[1 + d + i] = -t[1 + i] * pw * xi.ln();
            }
        }
        FamilyId::LogQuadratic => {
            let u = log_coords("log_quadratic", x)?;
            let value = log_quadratic_exponent(t, &u).exp();
            g[0] = value;
            for i in 0..d {
                g[1 + i] = value * u[i];
            }
            let mut idx = 1 + d;
            for i in 0..d {
                for j in i..d {
                    g[idx] = value * u[i] * u[j];
                    idx += 1;
                }
            }
        }
        FamilyId::SaturatingPower => {
            let shifted = x.coords[0] + t[2];
            if shifted <= 0.0 {
                return Err(Error::Domain {
                    family: "saturating_power",
                    message: format!("x + k = {shifted} must be > 0"),
                });
            }
            let pw = shifted.powf(-t[3]);
            g[0] = 1.0;
            g[1] = pw;
            g[2] = -t[1] * t[3] * shifted.powf(-t[3] - 1.0);
            g[3] = -t[1] * pw * shifted.ln();
        }
        FamilyId::Linear => {
            g[0] = 1.0;
            g[1..=d].copy_from_slice(&x.coords[..d]);
        }
    }
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFinite(format!("{} jacobian", spec.family_id.id())))
    }
}

/// Value and Jacobian in one pass, sharing the power/exp evaluations.
/// Equivalent to calling [`evaluate`] and [`param_jacobian`] separately;
/// this is the fitting hot path.
pub fn eval_and_jacobian(
    spec: &LawSpec,
    theta: &ParamVector,
    x: &ConfigPoint,
) -> Result<(f64, Vec<f64>)> {
    spec.check_point(x)?;
    let t = &theta.values;
    let p = spec.param_count();
    if t.len() != p {
        return Err(Error::Spec(format!("theta has {} entries, law expects {p}", t.len())));
    }
    let d = spec.input_dim;
    let mut g = vec![0.0; p];
    let value = match spec.family_id {
        FamilyId::PowerSum => {
            let mut acc = t[0];
            g[0] = 1.0;
            for i in 0..d {
                let xi = positive_coord("power_sum", i, x.coords[i])?;
                let pw = xi.powf(-t[1 + d + i]);
                acc += t[1 + i] * pw;
                g[1 + i] = pw;
                g[1 + d + i] = -t[1 + i] * pw * xi.ln();
            }
            acc
        }
        FamilyId::LogQuadratic => {
            let u = log_coords("log_quadratic", x)?;
            let value = log_quadratic_exponent(t, &u).exp();
            g[0] = value;
            for i in 0..d {
                g[1 + i] = value * u[i];
            }
            let mut idx = 1 + d;
            for i in 0..d {
                for j in i..d {
                    g[idx] = value * u[i] * u[j];
                    idx += 1;
                }
            }
            value
        }
        FamilyId::SaturatingPower => {
            let shifted = x.coords[0] + t[2];
            if shifted <= 0.0 {
                return Err(Error::Domain {
                    family: "saturating_power",
                    message: format!("x + k = {shifted} must be > 0"),
                });
            }
            let pw = shifted.powf(-t[3]);
            g[0] = 1.0;
            g[1] = pw;
            g[2] = -t[1] * t[3] * pw / shifted;
            g[3] = -t[1] * pw * shifted.ln();
            t[0] + t[1] * pw
        }
        FamilyId::Linear => {
            g[0] = 1.0;
            g[1..=d].copy_from_slice(&x.coords[..d]);
            let mut acc = t[0];
            for i in 0..d {
                acc += t[1 + i] * x.coords[i];
            }
            acc
        }
    };
    if value.is_finite() && g.iter().all(|v| v.is_finite()) {
        Ok((value, g))
    } else {
        Err(Error::NonFinite(format!("{} evaluation", spec.family_id.id())))
    }
}

/// Jacobian with log-scale sensitivity for positive-flagged parameters:
/// entry i is `df/dtheta_i * theta_i` when flagged, else `df/dtheta_i`.
pub fn scaled_jacobian(spec: &LawSpec, theta: &ParamVector, x: &ConfigPoint) -> Result<Vec<f64>> {
    let mut g = param_jacobian(spec, theta, x)?;
    for (gi, (&flag, &ti)) in g.iter_mut().zip(spec.positive_flags.iter().zip(&theta.values)) {
        if flag {
            *gi *= ti;
        }
    }
    Ok(g)
}

/// Cost proxy kinds. The string forms are the instance-file tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    #[serde(rename = "product_6ND")]
    Product6Nd,
    #[serde(rename = "product_NE")]
    ProductNe,
    #[serde(rename = "single_N")]
    SingleN,
    #[serde(rename = "dual_sparse_6N1D1_6N2D2")]
    DualSparse,
    #[serde(rename = "unit")]
    Unit,
}

impl CostKind {
    pub fn arity(&self) -> usize {
        match self {
            CostKind::Product6Nd | CostKind::ProductNe => 2,
            CostKind::SingleN => 1,
            CostKind::DualSparse => 4,
            CostKind::Unit => 0,
        }
    }
}

/// Task cost model: a kind plus the coordinate indices feeding its formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub kind: CostKind,
    #[serde(default)]
    pub coordinate_indices: Vec<usize>,
}

impl CostModel {
    pub fn new(kind: CostKind, coordinate_indices: Vec<usize>) -> Self {
        Self { kind, coordinate_indices }
    }

    pub fn unit() -> Self {
        Self { kind: CostKind::Unit, coordinate_indices: vec![] }
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if self.coordinate_indices.len() != self.kind.arity() {
            return Err(Error::Cost(format!(
                "cost kind {:?} takes {} coordinate indices, got {}",
                self.kind,
                self.kind.arity(),
                self.coordinate_indices.len()
            )));
        }
        if let Some(&bad) = self.coordinate_indices.iter().find(|&&i| i >= input_dim) {
            return Err(Error::Cost(format!(
                "coordinate index {bad} out of range for input_dim {input_dim}"
            )));
        }
        Ok(())
    }

    fn operand(&self, x: &ConfigPoint, slot: usize) -> Result<f64> {
        let idx = self.coordinate_indices[slot];
        let v = x.coords[idx];
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::Cost(format!(
                "non-positive operand {v} at coordinate {idx} for a product cost"
            )))
        }
    }

    /// Cost of running the experiment at `x`. Always > 0.
    pub fn cost(&self, x: &ConfigPoint) -> Result<f64> {
        match self.kind {
            CostKind::Product6Nd => Ok(6.0 * self.operand(x, 0)? * self.operand(x, 1)?),
            CostKind::ProductNe => Ok(self.operand(x, 0)? * self.operand(x, 1)?),
            CostKind::SingleN => self.operand(x, 0),
            CostKind::DualSparse => Ok(6.0 * self.operand(x, 0)? * self.operand(x, 1)?
                + 6.0 * self.operand(x, 2)? * self.operand(x, 3)?),
            CostKind::Unit => Ok(1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chinchilla() -> LawSpec {
        LawSpec::power_sum(2)
    }

    #[test]
    fn evaluate_zero_amplitude_terms() {
        // E=2, A=0, B=0 leaves only the offset. Zero amplitudes sit outside
        // the default positive bounds, so widen them for this check.
        let mut spec = chinchilla();
        spec.bounds = vec![(-1e3, 1e3); 5];
        spec.positive_flags = vec![false; 5];
        let theta = ParamVector::new(vec![2.0, 0.0, 0.0, 0.5, 0.5]);
        let x = ConfigPoint::new(vec![1e6, 1e9]);
        assert_eq!(evaluate(&spec, &theta, &x).unwrap(), 2.0);
    }

    #[test]
    fn evaluate_single_power_term() {
        let mut spec = chinchilla();
        spec.bounds = vec![(-1e3, 1e3); 5];
        spec.positive_flags = vec![false; 5];
        let theta = ParamVector::new(vec![0.0, 1.0, 0.0, 1.0, 1.0]);
        let x = ConfigPoint::new(vec![4.0, 1.0]);
        assert_eq!(evaluate(&spec, &theta, &x).unwrap(), 0.25);
    }

    #[test]
    fn evaluate_rejects_nonpositive_coordinate() {
        let spec = chinchilla();
        let theta = ParamVector::new(vec![1.0, 1.0, 1.0, 0.5, 0.5]);
        let x = ConfigPoint::new(vec![-1.0, 1e9]);
        assert!(matches!(evaluate(&spec, &theta, &x), Err(Error::Domain { .. })));
    }

    #[test]
    fn evaluate_is_pure() {
        let spec = chinchilla();
        let theta = ParamVector::new(vec![1.7, 400.0, 410.0, 0.34, 0.28]);
        let x = ConfigPoint::new(vec![3.2e7, 8.1e9]);
        let a = evaluate(&spec, &theta, &x).unwrap();
        let b = evaluate(&spec, &theta, &x).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn jacobian_offset_entry_is_one() {
        let spec = chinchilla();
        let theta = ParamVector::new(vec![1.7, 400.0, 410.0, 0.34, 0.28]);
        let x = ConfigPoint::new(vec![1e6, 1e9]);
        let g = param_jacobian(&spec, &theta, &x).unwrap();
        assert_eq!(g[0], 1.0);
    }

    #[test]
    fn jacobian_amplitude_entry_is_power() {
        let mut spec = chinchilla();
        spec.bounds = vec![(-1e3, 1e3); 5];
        spec.positive_flags = vec![false; 5];
        let theta = ParamVector::new(vec![0.0, 1.0, 0.0, 1.0, 1.0]);
        let x = ConfigPoint::new(vec![4.0, 1.0]);
        let g = param_jacobian(&spec, &theta, &x).unwrap();
        assert_eq!(g[1], 0.25);
    }

    #[test]
    fn scaled_jacobian_identity_without_flags() {
        let spec = LawSpec::linear(3);
        let theta = ParamVector::new(vec![1.0, -2.0, 3.0, 0.5]);
        let x = ConfigPoint::new(vec![0.3, 0.7, -1.2]);
        assert_eq!(
            scaled_jacobian(&spec, &theta, &x).unwrap(),
            param_jacobian(&spec, &theta, &x).unwrap()
        );
    }

    #[test]
    fn scaled_jacobian_unit_parameter_unchanged() {
        let spec = LawSpec::saturating_power();
        // A = 1 flagged positive: scaled entry equals the raw entry.
        let theta = ParamVector::new(vec![0.5, 1.0, 2.0, 0.7]);
        let x = ConfigPoint::new(vec![3.0]);
        let raw = param_jacobian(&spec, &theta, &x).unwrap();
        let scaled = scaled_jacobian(&spec, &theta, &x).unwrap();
        assert_eq!(raw[1], scaled[1]);
        // k = 2 flagged positive: scaled entry doubles.
        assert_eq!(scaled[2], 2.0 * raw[2]);
    }

    #[test]
    fn cost_product_6nd() {
        let m = CostModel::new(CostKind::Product6Nd, vec![0, 1]);
        let x = ConfigPoint::new(vec![1e6, 1e9]);
        assert_eq!(m.cost(&x).unwrap(), 6e15);
    }

    #[test]
    fn cost_unit() {
        let m = CostModel::unit();
        assert_eq!(m.cost(&ConfigPoint::new(vec![42.0])).unwrap(), 1.0);
    }

    #[test]
    fn cost_dual_sparse() {
        let m = CostModel::new(CostKind::DualSparse, vec![0, 1, 2, 3]);
        let x = ConfigPoint::new(vec![2.0, 3.0, 5.0, 7.0]);
        assert_eq!(m.cost(&x).unwrap(), 246.0);
    }

    #[test]
    fn cost_rejects_nonpositive_operand() {
        let m = CostModel::new(CostKind::ProductNe, vec![0, 1]);
        let x = ConfigPoint::new(vec![0.0, 3.0]);
        assert!(m.cost(&x).is_err());
    }

    #[test]
    fn cost_monotone_in_referenced_coordinates() {
        let m = CostModel::new(CostKind::Product6Nd, vec![0, 1]);
        let base = m.cost(&ConfigPoint::new(vec![10.0, 20.0])).unwrap();
        assert!(m.cost(&ConfigPoint::new(vec![10.5, 20.0])).unwrap() > base);
        assert!(m.cost(&ConfigPoint::new(vec![10.0, 20.5])).unwrap() > base);
    }

    #[test]
    fn spec_validate_catches_mismatches() {
        let mut spec = chinchilla();
        assert!(spec.validate().is_ok());
        spec.param_names.pop();
        assert!(spec.validate().is_err());

        let mut spec = LawSpec::saturating_power();
        spec.input_dim = 2;
        assert!(spec.validate().is_err());

        let mut spec = LawSpec::linear(2);
        spec.bounds[1] = (3.0, 3.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn family_id_round_trips() {
        for f in [
            FamilyId::PowerSum,
            FamilyId::LogQuadratic,
            FamilyId::SaturatingPower,
            FamilyId::Linear,
        ] {
            assert_eq!(FamilyId::from_id(f.id()), Some(f));
        }
        assert_eq!(FamilyId::from_id("nope"), None);
    }

    #[test]
    fn log_quadratic_param_layout() {
        let spec = LawSpec::log_quadratic(2);
        assert_eq!(spec.param_count(), 6);
        assert_eq!(spec.param_names, vec!["c0", "c1", "c2", "c11", "c12", "c22"]);
        // u = (ln e, ln e) = (1, 1): L = exp(c0 + c1 + c2 + c11 + c12 + c22)
        let theta = ParamVector::new(vec![0.1, 0.2, 0.3, -0.1, 0.05, -0.02]);
        let x = ConfigPoint::new(vec![std::f64::consts::E, std::f64::consts::E]);
        let expect = (0.1 + 0.2 + 0.3 - 0.1 + 0.05 - 0.02f64).exp();
        assert!((evaluate(&spec, &theta, &x).unwrap() - expect).abs() < 1e-14);
    }
}
