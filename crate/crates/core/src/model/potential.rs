//! Double-well potentials and their convex splitting.

use std::f64::consts::LN_2;

use super::polynomial::Polynomial;
use super::ModelError;

/// Free-energy density `f` of the order parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `c1 (r ln r + (1 - r) ln(1 - r)) - c2 r (1 - r)` on the open interval (0, 1).
    Logarithmic { c1: f64, c2: f64 },
    /// `(r^2 - 1)^2 / 4` on the real line.
    Quartic,
    /// Polynomial potential. `convex_part` declares `f1`; the remainder is `f - f1`.
    CustomPolynomial {
        coefficients: Polynomial,
        convex_part: Option<Polynomial>,
    },
}

impl Potential {
    /// Builds the logarithmic potential, rejecting parameters without a double well.
    pub fn logarithmic(c1: f64, c2: f64) -> Result<Self, ModelError> {
        let p = Potential::Logarithmic { c1, c2 };
        p.check_parameters()?;
        Ok(p)
    }

    pub fn quartic() -> Self {
        Potential::Quartic
    }

    pub fn polynomial(
        coefficients: Vec<f64>,
        convex_part: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        let p = Potential::CustomPolynomial {
            coefficients: Polynomial::new(coefficients),
            convex_part: convex_part.map(Polynomial::new),
        };
        p.check_parameters()?;
        Ok(p)
    }

    pub fn check_parameters(&self) -> Result<(), ModelError> {
        match self {
            Potential::Logarithmic { c1, c2 } => {
                if !(c1.is_finite() && *c1 > 0.0) {
                    return Err(ModelError::InvalidParameter(format!("c1 > 0 violated (c1 = {c1})")));
                }
                if !(c2.is_finite() && *c2 > 0.0) {
                    return Err(ModelError::InvalidParameter(format!("c2 > 0 violated (c2 = {c2})")));
                }
                if *c2 <= 2.0 * c1 {
                    return Err(ModelError::InvalidParameter(format!(
                        "c2 > 2·c1 violated (c1 = {c1}, c2 = {c2})"
                    )));
                }
                Ok(())
            }
            Potential::Quartic => Ok(()),
            Potential::CustomPolynomial { coefficients, convex_part } => {
                let finite = coefficients.is_finite()
                    && convex_part.as_ref().map_or(true, Polynomial::is_finite);
                if finite {
                    Ok(())
                } else {
                    Err(ModelError::InvalidParameter(
                        "polynomial potential has non-finite coefficients".into(),
                    ))
                }
            }
        }
    }

    /// Open interval on which the potential is defined, if bounded.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Potential::Logarithmic { .. } => Some((0.0, 1.0)),
            _ => None,
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        match self.domain() {
            Some((lo, hi)) => r > lo && r < hi,
            None => r.is_finite(),
        }
    }

    fn check_domain(&self, r: f64) -> Result<(), ModelError> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(ModelError::Domain { r })
        }
    }

    pub fn value(&self, r: f64) -> Result<f64, ModelError> {
        self.check_domain(r)?;
        Ok(match self {
            Potential::Logarithmic { c1, c2 } => {
                c1 * (r * r.ln() + (1.0 - r) * (-r).ln_1p()) - c2 * r * (1.0 - r)
            }
            Potential::Quartic => 0.25 * (r * r - 1.0).powi(2),
            Potential::CustomPolynomial { coefficients, .. } => coefficients.value(r),
        })
    }

    pub fn first(&self, r: f64) -> Result<f64, ModelError> {
        self.check_domain(r)?;
        Ok(match self {
            Potential::Logarithmic { c1, c2 } => c1 * (r.ln() - (-r).ln_1p()) - c2 * (1.0 - 2.0 * r),
            Potential::Quartic => r * (r * r - 1.0),
            Potential::CustomPolynomial { coefficients, .. } => coefficients.first(r),
        })
    }

    pub fn second(&self, r: f64) -> Result<f64, ModelError> {
        self.check_domain(r)?;
        Ok(match self {
            Potential::Logarithmic { c1, c2 } => c1 / (r * (1.0 - r)) + 2.0 * c2,
            Potential::Quartic => 3.0 * r * r - 1.0,
            Potential::CustomPolynomial { coefficients, .. } => coefficients.second(r),
        })
    }

    /// Splits `f = f1 + f2` with `f1` convex and nonnegative.
    ///
    /// Logarithmic: `f1 = c1 (r ln r + (1-r) ln(1-r)) + c1 ln 2`, `f2 = -c2 r(1-r) - c1 ln 2`.
    /// Quartic: `f1 = (r^4 + 1)/4`, `f2 = -r^2/2`.
    pub fn split(&self) -> Result<ConvexSplit, ModelError> {
        let kind = match self {
            Potential::Logarithmic { c1, c2 } => SplitKind::Logarithmic { c1: *c1, c2: *c2 },
            Potential::Quartic => SplitKind::Polynomial {
                convex: Polynomial::new(vec![0.25, 0.0, 0.0, 0.0, 0.25]),
                remainder: Polynomial::new(vec![0.0, 0.0, -0.5]),
            },
            Potential::CustomPolynomial { coefficients, convex_part } => {
                let convex = convex_part.clone().ok_or(ModelError::MissingSplit)?;
                SplitKind::Polynomial {
                    remainder: coefficients.sub(&convex),
                    convex,
                }
            }
        };
        Ok(ConvexSplit { kind })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SplitKind {
    Logarithmic { c1: f64, c2: f64 },
    Polynomial { convex: Polynomial, remainder: Polynomial },
}

/// The pair `(f1, f2)` produced by [`Potential::split`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSplit {
    kind: SplitKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Convex,
    Remainder,
}

/// One half of a [`ConvexSplit`], evaluated as a value/first/second triple.
#[derive(Debug, Clone, Copy)]
pub struct SplitPart<'a> {
    split: &'a ConvexSplit,
    part: Part,
}

impl ConvexSplit {
    pub fn convex(&self) -> SplitPart<'_> {
        SplitPart { split: self, part: Part::Convex }
    }

    pub fn remainder(&self) -> SplitPart<'_> {
        SplitPart { split: self, part: Part::Remainder }
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        match self.kind {
            SplitKind::Logarithmic { .. } => Some((0.0, 1.0)),
            SplitKind::Polynomial { .. } => None,
        }
    }

    fn check_domain(&self, r: f64) -> Result<(), ModelError> {
        let inside = match self.domain() {
            Some((lo, hi)) => r > lo && r < hi,
            None => r.is_finite(),
        };
        if inside {
            Ok(())
        } else {
            Err(ModelError::Domain { r })
        }
    }
}

impl SplitPart<'_> {
    pub fn value(&self, r: f64) -> Result<f64, ModelError> {
        self.split.check_domain(r)?;
        Ok(match (&self.split.kind, self.part) {
            (SplitKind::Logarithmic { c1, .. }, Part::Convex) => {
                c1 * (r * r.ln() + (1.0 - r) * (-r).ln_1p()) + c1 * LN_2
            }
            (SplitKind::Logarithmic { c1, c2 }, Part::Remainder) => -c2 * r * (1.0 - r) - c1 * LN_2,
            (SplitKind::Polynomial { convex, .. }, Part::Convex) => convex.value(r),
            (SplitKind::Polynomial { remainder, .. }, Part::Remainder) => remainder.value(r),
        })
    }

    pub fn first(&self, r: f64) -> Result<f64, ModelError> {
        self.split.check_domain(r)?;
        Ok(match (&self.split.kind, self.part) {
            (SplitKind::Logarithmic { c1, .. }, Part::Convex) => c1 * (r.ln() - (-r).ln_1p()),
            (SplitKind::Logarithmic { c2, .. }, Part::Remainder) => -c2 * (1.0 - 2.0 * r),
            (SplitKind::Polynomial { convex, .. }, Part::Convex) => convex.first(r),
            (SplitKind::Polynomial { remainder, .. }, Part::Remainder) => remainder.first(r),
        })
    }

    pub fn second(&self, r: f64) -> Result<f64, ModelError> {
        self.split.check_domain(r)?;
        Ok(match (&self.split.kind, self.part) {
            (SplitKind::Logarithmic { c1, .. }, Part::Convex) => c1 / (r * (1.0 - r)),
            (SplitKind::Logarithmic { c2, .. }, Part::Remainder) => 2.0 * c2,
            (SplitKind::Polynomial { convex, .. }, Part::Convex) => convex.second(r),
            (SplitKind::Polynomial { remainder, .. }, Part::Remainder) => remainder.second(r),
        })
    }
}
