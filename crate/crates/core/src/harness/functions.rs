//! Analytic test functions with registered derivatives.

use crate::error::{Result, SplineError};

type Scalar = fn(f64) -> f64;

/// A function with analytic derivatives of orders 1..=5 where known.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    value: Scalar,
    derivatives: [Option<Scalar>; 5],
    /// Default interval for experiments.
    pub interval: (f64, f64),
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let orders: Vec<usize> = (1..=5).filter(|&k| self.derivatives[k - 1].is_some()).collect();
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("derivatives", &orders)
            .field("interval", &self.interval)
            .finish()
    }
}

impl TestFunction {
    pub const fn new(
        name: &'static str,
        value: Scalar,
        derivatives: [Option<Scalar>; 5],
        interval: (f64, f64),
    ) -> Self {
        Self {
            name,
            value,
            derivatives,
            interval,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    /// Order 0 is the function itself; `None` when unregistered.
    pub fn derivative(&self, order: usize) -> Option<Scalar> {
        match order {
            0 => Some(self.value),
            1..=5 => self.derivatives[order - 1],
            _ => None,
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(x)).collect()
    }

    /// `(g(a), g(b))` for the derivative of `order`.
    pub fn end_values(&self, order: usize, a: f64, b: f64) -> Option<(f64, f64)> {
        self.derivative(order).map(|g| (g(a), g(b)))
    }

    pub fn lookup(name: &str) -> Result<TestFunction> {
        REGISTRY
            .iter()
            .find(|f| f.name.eq_ignore_ascii_case(name.trim()))
            .copied()
            .ok_or_else(|| SplineError::UnknownFunction(name.to_string()))
    }

    pub fn registry() -> &'static [TestFunction] {
        &REGISTRY
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn runge(x: f64) -> f64 {
    1.0 / (1.0 + x * x)
}

static REGISTRY: [TestFunction; 7] = [
    TestFunction::new(
        "sin",
        f64::sin,
        [
            Some(f64::cos),
            Some(|x| -x.sin()),
            Some(|x| -x.cos()),
            Some(f64::sin),
            Some(f64::cos),
        ],
        (0.0, std::f64::consts::PI),
    ),
    TestFunction::new(
        "runge",
        runge,
        [
            Some(|x| -2.0 * x * runge(x).powi(2)),
            Some(|x| (6.0 * x * x - 2.0) * runge(x).powi(3)),
            Some(|x| -24.0 * x * (x * x - 1.0) * runge(x).powi(4)),
            Some(|x| {
                let x2 = x * x;
                24.0 * (5.0 * x2 * x2 - 10.0 * x2 + 1.0) * runge(x).powi(5)
            }),
            Some(|x| {
                let x2 = x * x;
                -240.0 * x * (3.0 * x2 * x2 - 10.0 * x2 + 3.0) * runge(x).powi(6)
            }),
        ],
        (-1.0, 3.0),
    ),
    TestFunction::new(
        "logistic",
        logistic,
        [
            Some(|x| {
                let s = logistic(x);
                s * (1.0 - s)
            }),
            Some(|x| {
                let s = logistic(x);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }),
            Some(|x| {
                let s = logistic(x);
                s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s)
            }),
            Some(|x| {
                let s = logistic(x);
                s * (1.0 - s) * (1.0 - 2.0 * s) * (1.0 - 12.0 * s + 12.0 * s * s)
            }),
            Some(|x| {
                let s = logistic(x);
                let p = 1.0 + s * (-30.0 + s * (150.0 + s * (-240.0 + s * 120.0)));
                s * (1.0 - s) * p
            }),
        ],
        (-1.0, 4.0),
    ),
    TestFunction::new(
        "exp",
        f64::exp,
        [Some(f64::exp), Some(f64::exp), Some(f64::exp), Some(f64::exp), Some(f64::exp)],
        (0.0, 1.0),
    ),
    TestFunction::new(
        "cubic",
        |x| x * x * x - 2.0 * x + 1.0,
        [
            Some(|x| 3.0 * x * x - 2.0),
            Some(|x| 6.0 * x),
            Some(|_| 6.0),
            Some(|_| 0.0),
            Some(|_| 0.0),
        ],
        (-1.0, 2.0),
    ),
    TestFunction::new(
        "quartic",
        |x| x.powi(4),
        [
            Some(|x| 4.0 * x.powi(3)),
            Some(|x| 12.0 * x * x),
            Some(|x| 24.0 * x),
            Some(|_| 24.0),
            Some(|_| 0.0),
        ],
        (0.0, 4.0),
    ),
    TestFunction::new(
        "quintic",
        |x| x.powi(5),
        [
            Some(|x| 5.0 * x.powi(4)),
            Some(|x| 20.0 * x.powi(3)),
            Some(|x| 60.0 * x * x),
            Some(|x| 120.0 * x),
            Some(|_| 120.0),
        ],
        (0.0, 5.0),
    ),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::SplitMix64;

    /// Five-point central difference.
    fn central(g: Scalar, x: f64, h: f64) -> f64 {
        (g(x - 2.0 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = SplitMix64::new(7);
        for f in TestFunction::registry() {
            let (a, b) = f.interval;
            for _ in 0..100 {
                let x = a + (b - a) * rng.next_f64();
                for k in 1..=5 {
                    let lower = f.derivative(k - 1).unwrap();
                    let want = f.derivative(k).unwrap()(x);
                    let got = central(lower, x, 1e-3);
                    let scale = want.abs().max(1.0);
                    assert!((got - want).abs() <= 1e-5 * scale, "{} order {k} at {x}", f.name);
                }
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(TestFunction::lookup("Runge").unwrap().name, "runge");
        assert!(matches!(
            TestFunction::lookup("gamma"),
            Err(SplineError::UnknownFunction(_))
        ));
        let sin = TestFunction::lookup("sin").unwrap();
        assert!(sin.derivative(6).is_none());
        assert_eq!(sin.end_values(2, 0.0, 0.0), Some((-0.0, -0.0)));
    }
}
