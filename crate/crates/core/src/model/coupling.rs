use super::polynomial::Polynomial;

/// The coupling function `g` weighting the time derivative of the chemical potential.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// `g(r) = r (1 - r)`.
    ConcaveQuadratic,
    CustomPolynomial(Polynomial),
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::ConcaveQuadratic
    }
}

impl Coupling {
    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Coupling::CustomPolynomial(Polynomial::new(coefficients))
    }

    /// `g ≡ 0`, which decouples the chemical potential into a heat equation.
    pub fn zero() -> Self {
        Coupling::polynomial(vec![0.0])
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Coupling::ConcaveQuadratic => r * (1.0 - r),
            Coupling::CustomPolynomial(p) => p.value(r),
        }
    }

    pub fn first(&self, r: f64) -> f64 {
        match self {
            Coupling::ConcaveQuadratic => 1.0 - 2.0 * r,
            Coupling::CustomPolynomial(p) => p.first(r),
        }
    }

    pub fn second(&self, r: f64) -> f64 {
        match self {
            Coupling::ConcaveQuadratic => -2.0,
            Coupling::CustomPolynomial(p) => p.second(r),
        }
    }
}
