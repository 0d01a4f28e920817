//! Size/saliency threshold functions for the merge predicate.
//!
//! A form describes ω, the minimal cluster size needed to refuse a merge at
//! saliency `w`. The τ counterpart of a form is its generalized inverse,
//! `τ(s) = inf { w >= 0 : ω(w) <= s }`, so `d >= τ(s)` holds exactly when
//! `ω(d) <= s` (up to floating-point rounding at the boundary).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdForm {
    /// `ω(w) = c`
    Const(f64),
    /// `ω(w) = s0 (1 - w)`
    Linear(f64),
    /// `ω(w) = s0 (1 - w)^2`
    Square(f64),
}

impl ThresholdForm {
    fn scale(&self) -> f64 {
        match *self {
            ThresholdForm::Const(c) => c,
            ThresholdForm::Linear(s) | ThresholdForm::Square(s) => s,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ThresholdForm::Const(_) => "const",
            ThresholdForm::Linear(_) => "linear",
            ThresholdForm::Square(_) => "square",
        }
    }
}

impl fmt::Display for ThresholdForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name(), self.scale())
    }
}

impl FromStr for ThresholdForm {
    type Err = Error;

    /// `const:<c>`, `linear:<s0>` or `square:<s0>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidThreshold(format!("`{s}`: expected <const|linear|square>:<s0>"));
        let (name, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        let form = match name.trim() {
            "const" => ThresholdForm::Const(value),
            "linear" => ThresholdForm::Linear(value),
            "square" => ThresholdForm::Square(value),
            _ => return Err(bad()),
        };
        ThresholdFn::new(ThresholdKind::Omega, form)?;
        Ok(form)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdKind {
    /// Predicate evaluated as `d >= τ(min size)`.
    Tau,
    /// Predicate evaluated as `ω(d) <= min size`.
    #[default]
    Omega,
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(ThresholdKind::Tau),
            "omega" => Ok(ThresholdKind::Omega),
            _ => Err(Error::InvalidThreshold(format!(
                "`{s}`: expected tau or omega"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdFn {
    kind: ThresholdKind,
    form: ThresholdForm,
}

impl ThresholdFn {
    pub fn new(kind: ThresholdKind, form: ThresholdForm) -> Result<Self> {
        let s = form.scale();
        let ok = match form {
            // An infinite constant merges every adjacent pair.
            ThresholdForm::Const(_) => s >= 0.0 && !s.is_nan(),
            _ => s >= 0.0 && s.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidThreshold(format!(
                "{} parameter {s} must be non-negative",
                form.name()
            )));
        }
        Ok(ThresholdFn { kind, form })
    }

    pub fn omega(form: ThresholdForm) -> Result<Self> {
        Self::new(ThresholdKind::Omega, form)
    }

    pub fn tau(form: ThresholdForm) -> Result<Self> {
        Self::new(ThresholdKind::Tau, form)
    }

    /// Size-independent predicate: every adjacent pair is merged, giving
    /// plain single linkage.
    pub fn always_merge() -> Self {
        ThresholdFn {
            kind: ThresholdKind::Omega,
            form: ThresholdForm::Const(f64::INFINITY),
        }
    }

    pub fn kind(&self) -> ThresholdKind {
        self.kind
    }

    pub fn form(&self) -> ThresholdForm {
        self.form
    }

    #[inline]
    fn omega_clamped(&self, w: f64) -> f64 {
        match self.form {
            ThresholdForm::Const(c) => c,
            ThresholdForm::Linear(s0) => s0 * (1.0 - w).max(0.0),
            ThresholdForm::Square(s0) => {
                let r = (1.0 - w).max(0.0);
                s0 * r * r
            }
        }
    }

    #[inline]
    fn tau_clamped(&self, size: f64) -> f64 {
        match self.form {
            ThresholdForm::Const(c) => {
                if size >= c {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ThresholdForm::Linear(s0) => {
                if s0 == 0.0 {
                    0.0
                } else {
                    (1.0 - size / s0).max(0.0)
                }
            }
            ThresholdForm::Square(s0) => {
                if s0 == 0.0 {
                    0.0
                } else {
                    (1.0 - (size / s0).sqrt()).max(0.0)
                }
            }
        }
    }

    /// ω at saliency `w`. Linear and square forms require `w` in `[0, 1]`.
    pub fn omega_at(&self, w: f64) -> Result<f64> {
        let in_domain = match self.form {
            ThresholdForm::Const(_) => !w.is_nan(),
            _ => (0.0..=1.0).contains(&w),
        };
        if !in_domain {
            return Err(Error::ThresholdDomain(w));
        }
        Ok(self.omega_clamped(w))
    }

    /// τ at cluster size `size >= 0`.
    pub fn tau_at(&self, size: f64) -> Result<f64> {
        if !(size >= 0.0) {
            return Err(Error::ThresholdDomain(size));
        }
        Ok(self.tau_clamped(size))
    }

    /// Evaluates the function this predicate is expressed in: ω of a
    /// saliency for the omega kind, τ of a size for the tau kind.
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self.kind {
            ThresholdKind::Omega => self.omega_at(x),
            ThresholdKind::Tau => self.tau_at(x),
        }
    }

    /// The predicate Λ for clusters at saliency `d` whose smaller size is
    /// `min_size`. `true` means the clusters stay separate.
    #[inline]
    pub fn keeps_apart(&self, d: f64, min_size: f64) -> bool {
        match self.kind {
            ThresholdKind::Omega => self.omega_clamped(d) <= min_size,
            ThresholdKind::Tau => d >= self.tau_clamped(min_size),
        }
    }
}

impl fmt::Display for ThresholdFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ThresholdKind::Tau => "tau",
            ThresholdKind::Omega => "omega",
        };
        write!(f, "{} ({kind})", self.form)
    }
}
