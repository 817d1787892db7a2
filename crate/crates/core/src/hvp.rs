//! Hessian-vector products of one component (or of the full sum) at a fixed point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm};
use crate::problems::{check_dim, check_point, full_gradient, ComponentObjective};

/// Forward-difference base step, `sqrt` of the f64 machine epsilon.
pub fn default_eps0() -> f64 {
    f64::EPSILON.sqrt()
}

/// A symmetric linear map applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HvpMode {
    Exact,
    #[serde(rename = "fd")]
    FiniteDifference,
    /// Exact when the objective supports it, finite differences otherwise.
    Auto,
}

impl fmt::Display for HvpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HvpMode::Exact => "exact",
            HvpMode::FiniteDifference => "fd",
            HvpMode::Auto => "auto",
        })
    }
}

impl FromStr for HvpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(HvpMode::Exact),
            "fd" => Ok(HvpMode::FiniteDifference),
            "auto" => Ok(HvpMode::Auto),
            other => Err(Error::Unknown { what: "hvp mode", value: other.to_string() }),
        }
    }
}

/// Which part of the finite sum the Hessian belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianScope {
    Component(usize),
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSettings {
    pub eps0: f64,
    /// Central differences instead of the one-sided formula.
    pub central: bool,
}

impl Default for FdSettings {
    fn default() -> Self {
        FdSettings { eps0: default_eps0(), central: false }
    }
}

#[derive(Debug, Clone)]
enum Product {
    Exact,
    FiniteDifference { base_gradient: Vec<f64>, x_norm: f64, settings: FdSettings },
}

/// `v -> H(x) v` for a fixed objective part and base point.
#[derive(Clone)]
pub struct HvpOperator<'a, O: ?Sized> {
    obj: &'a O,
    scope: HessianScope,
    x: Vec<f64>,
    product: Product,
}

impl<O: ?Sized> fmt::Debug for HvpOperator<'_, O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HvpOperator")
            .field("scope", &self.scope)
            .field("dim", &self.x.len())
            .field("product", &self.product)
            .finish()
    }
}

fn check_scope<O: ComponentObjective + ?Sized>(obj: &O, scope: HessianScope, x: &[f64]) -> Result<()> {
    match scope {
        HessianScope::Component(j) => check_point(obj, j, x),
        HessianScope::Full => check_dim(obj, x),
    }
}

fn scope_gradient<O: ComponentObjective + ?Sized>(
    obj: &O,
    scope: HessianScope,
    x: &[f64],
) -> Result<Vec<f64>> {
    let g = match scope {
        HessianScope::Component(j) => obj.gradient(j, x),
        HessianScope::Full => full_gradient(obj, x)?,
    };
    if !all_finite(&g) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(g)
}

/// Analytic product of `f_j` at `x`.
pub fn exact_hvp<'a, O: ComponentObjective + ?Sized>(
    obj: &'a O,
    j: usize,
    x: &[f64],
) -> Result<HvpOperator<'a, O>> {
    HvpOperator::exact(obj, HessianScope::Component(j), x)
}

/// One-sided finite-difference product of `f_j` at `x` with base step `eps0`.
pub fn fd_hvp<'a, O: ComponentObjective + ?Sized>(
    obj: &'a O,
    j: usize,
    x: &[f64],
    eps0: f64,
) -> Result<HvpOperator<'a, O>> {
    HvpOperator::finite_difference(
        obj,
        HessianScope::Component(j),
        x,
        FdSettings { eps0, central: false },
    )
}

impl<'a, O: ComponentObjective + ?Sized> HvpOperator<'a, O> {
    pub fn exact(obj: &'a O, scope: HessianScope, x: &[f64]) -> Result<Self> {
        check_scope(obj, scope, x)?;
        if !obj.supports_exact_hvp() {
            return Err(Error::UnsupportedHvp);
        }
        Ok(HvpOperator { obj, scope, x: x.to_vec(), product: Product::Exact })
    }

    /// Caches the gradient at `x`, so each one-sided `apply` costs one
    /// further gradient evaluation.
    pub fn finite_difference(
        obj: &'a O,
        scope: HessianScope,
        x: &[f64],
        settings: FdSettings,
    ) -> Result<Self> {
        check_scope(obj, scope, x)?;
        if !(settings.eps0 > 0.0 && settings.eps0.is_finite()) {
            return Err(Error::InvalidArgument("eps0 must be positive".into()));
        }
        let base_gradient =
            if settings.central { Vec::new() } else { scope_gradient(obj, scope, x)? };
        Ok(HvpOperator {
            obj,
            scope,
            x: x.to_vec(),
            product: Product::FiniteDifference { base_gradient, x_norm: norm(x), settings },
        })
    }

    pub fn with_mode(
        obj: &'a O,
        scope: HessianScope,
        x: &[f64],
        mode: HvpMode,
        settings: FdSettings,
    ) -> Result<Self> {
        match mode {
            HvpMode::Exact => Self::exact(obj, scope, x),
            HvpMode::FiniteDifference => Self::finite_difference(obj, scope, x, settings),
            HvpMode::Auto if obj.supports_exact_hvp() => Self::exact(obj, scope, x),
            HvpMode::Auto => Self::finite_difference(obj, scope, x, settings),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.product, Product::Exact)
    }

    pub fn scope(&self) -> HessianScope {
        self.scope
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    /// Step actually used by the finite-difference product for direction `v`.
    pub fn step_for(&self, v: &[f64]) -> Option<f64> {
        match &self.product {
            Product::Exact => None,
            Product::FiniteDifference { x_norm, settings, .. } => {
                Some(settings.eps0 * (1.0 + x_norm) / norm(v))
            }
        }
    }

    fn exact_product(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self.scope {
            HessianScope::Component(j) => self.obj.exact_hvp(j, &self.x, v).ok_or(Error::UnsupportedHvp),
            HessianScope::Full => {
                let mut out = vec![0.0; v.len()];
                for j in 0..self.obj.components() {
                    let hv = self.obj.exact_hvp(j, &self.x, v).ok_or(Error::UnsupportedHvp)?;
                    for (o, h) in out.iter_mut().zip(hv) {
                        *o += h;
                    }
                }
                Ok(out)
            }
        }
    }

    fn shifted_gradient(&self, step: f64, v: &[f64]) -> Result<Vec<f64>> {
        let shifted: Vec<f64> = self.x.iter().zip(v).map(|(xi, vi)| xi + step * vi).collect();
        scope_gradient(self.obj, self.scope, &shifted)
    }
}

impl<O: ComponentObjective + ?Sized> LinearOperator for HvpOperator<'_, O> {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.x.len() {
            return Err(Error::DimensionMismatch { expected: self.x.len(), actual: v.len() });
        }
        let out = match &self.product {
            Product::Exact => self.exact_product(v)?,
            Product::FiniteDifference { base_gradient, x_norm, settings } => {
                let v_norm = norm(v);
                if v_norm == 0.0 {
                    return Err(Error::ZeroDirection);
                }
                let eps = settings.eps0 * (1.0 + x_norm) / v_norm;
                if settings.central {
                    let plus = self.shifted_gradient(eps, v)?;
                    let minus = self.shifted_gradient(-eps, v)?;
                    plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * eps)).collect()
                } else {
                    let plus = self.shifted_gradient(eps, v)?;
                    plus.iter().zip(base_gradient).map(|(p, b)| (p - b) / eps).collect()
                }
            }
        };
        if !all_finite(&out) {
            return Err(Error::NonFinite("Hessian-vector product"));
        }
        Ok(out)
    }
}
