//! The generalized continued fraction unrolled from the square-root map:
//!
//! ```text
//! b/2 - sqrt(x) = a / (-b + a / (-b + a / (-b + ...))),   a = x - b^2/4
//! ```

use crate::error::{Result, RootError};
use crate::iteration::{sqrt_step, DEFAULT_ZERO_GUARD};
use crate::ulp::ulp_distance;

/// Deepest truncation that will be built.
pub const MAX_DEPTH: usize = 10_000;

/// Accumulated ulp tolerance between a truncation and the matching iterate.
pub const EQUIVALENCE_ULPS: u64 = 8;

/// Constant-coefficient continued fraction truncated at `depth` levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedCF {
    pub partial_numerator: f64,
    pub partial_denominator: f64,
    pub depth: usize,
}

impl GeneralizedCF {
    /// All partial numerators equal one.
    pub fn is_simple(&self) -> bool {
        self.partial_numerator == 1.0
    }

    /// Compact one-line form, `a/(-b + a/(-b + ...))`, showing `levels` levels.
    pub fn compact(&self, levels: usize) -> String {
        let levels = levels.clamp(1, self.depth);
        let a = self.partial_numerator;
        let q = self.partial_denominator;
        let mut out = String::new();
        for level in 0..levels {
            if level == 0 {
                out.push_str(&format!("{a}/"));
            } else {
                out.push_str(&format!("({q} + {a}/"));
            }
        }
        if levels < self.depth {
            out.push_str(&format!("({q} + ...)"));
        } else {
            out.push_str(&format!("{q}"));
        }
        out.push_str(&")".repeat(levels - 1));
        out
    }

    /// Staircase layout with fraction bars, `levels` levels deep.
    pub fn nested(&self, levels: usize) -> String {
        let levels = levels.clamp(1, self.depth);
        let a = format!("{}", self.partial_numerator);
        let head = format!("{} + ", self.partial_denominator);
        let bar = "-".repeat(a.len().max(head.len() + 3));
        let mut lines = vec![a.clone()];
        let mut indent = 0;
        for level in 0..levels {
            let pad = " ".repeat(indent);
            lines.push(format!("{pad}{bar}"));
            if level + 1 < levels {
                lines.push(format!("{pad}{head}{a}"));
                indent += head.len();
            } else if levels < self.depth {
                lines.push(format!("{pad}{head}..."));
            } else {
                lines.push(format!("{pad}{}", self.partial_denominator));
            }
        }
        lines.join("\n")
    }
}

pub fn build_gcf(x: f64, b: f64, depth: usize) -> Result<GeneralizedCF> {
    if b == 0.0 || !b.is_finite() {
        return Err(RootError::InvalidConfig(format!(
            "partial denominator -b must be finite and nonzero, got b = {b}"
        )));
    }
    if depth == 0 {
        return Err(RootError::InvalidConfig("depth must be at least 1".into()));
    }
    if depth > MAX_DEPTH {
        return Err(RootError::DepthBudget {
            requested: depth,
            cap: MAX_DEPTH,
        });
    }
    Ok(GeneralizedCF {
        partial_numerator: x - b * b / 4.0,
        partial_denominator: -b,
        depth,
    })
}

/// Bottom-up evaluation of the truncation: `v = a/q`, then `v = a/(q + v)`.
pub fn evaluate_gcf(g: &GeneralizedCF) -> Result<f64> {
    evaluate_at(g, g.depth)
}

fn evaluate_at(g: &GeneralizedCF, depth: usize) -> Result<f64> {
    let (a, q) = (g.partial_numerator, g.partial_denominator);
    let mut v = 0.0;
    for _ in 0..depth {
        let denominator = q + v;
        if !(denominator.abs() >= DEFAULT_ZERO_GUARD) {
            return Err(RootError::ZeroDivisor { at: v, denominator });
        }
        v = a / denominator;
    }
    Ok(v)
}

/// Values of the truncations at depths `1..=g.depth`.
pub fn truncations(g: &GeneralizedCF) -> Result<Vec<f64>> {
    (1..=g.depth).map(|k| evaluate_at(g, k)).collect()
}

/// Checks that every truncation of depth `k <= depth` matches the iterate
/// `c_{k+1}` of the square-root map started from `c1 = 0`.
pub fn gcf_iteration_equivalence(x: f64, b: f64, depth: usize) -> bool {
    let Ok(g) = build_gcf(x, b, depth) else {
        return false;
    };
    let mut c = 0.0;
    for k in 1..=depth {
        c = match sqrt_step(c, x, b) {
            Ok(v) => v,
            Err(_) => return false,
        };
        match evaluate_at(&g, k) {
            Ok(v) if ulp_distance(v, c) <= EQUIVALENCE_ULPS => {}
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficients() {
        let g = build_gcf(5.0, 4.0, 10).unwrap();
        assert_eq!((g.partial_numerator, g.partial_denominator), (1.0, -4.0));
        assert!(g.is_simple());
        let g = build_gcf(7.0, 4.0, 10).unwrap();
        assert_eq!((g.partial_numerator, g.partial_denominator), (3.0, -4.0));
        assert!(!g.is_simple());
        let g = build_gcf(9.0, 6.0, 7).unwrap();
        assert_eq!(g.partial_numerator, 0.0);
        assert_eq!(evaluate_gcf(&g).unwrap(), 0.0);
    }

    #[test]
    fn build_rejects() {
        assert!(build_gcf(5.0, 0.0, 3).is_err());
        assert!(build_gcf(5.0, 4.0, 0).is_err());
        assert_eq!(
            build_gcf(5.0, 4.0, MAX_DEPTH + 1).unwrap_err(),
            RootError::DepthBudget { requested: MAX_DEPTH + 1, cap: MAX_DEPTH }
        );
    }

    #[test]
    fn evaluation_examples() {
        let at = |depth| evaluate_gcf(&build_gcf(5.0, 4.0, depth).unwrap()).unwrap();
        assert_eq!(at(1), -0.25);
        assert!((at(2) - (-4.0 / 17.0)).abs() < 1e-15);
        assert!((at(30) - (2.0 - 5f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn zero_intermediate_denominator() {
        // a = -1, q = -1: v1 = 1, then q + v1 = 0
        let g = GeneralizedCF { partial_numerator: -1.0, partial_denominator: -1.0, depth: 3 };
        assert!(matches!(evaluate_gcf(&g), Err(RootError::ZeroDivisor { .. })));
    }

    #[test]
    fn equivalence_examples() {
        assert!(gcf_iteration_equivalence(5.0, 4.0, 10));
        assert!(gcf_iteration_equivalence(7.0, 4.0, 10));
        assert!(gcf_iteration_equivalence(9.0, 6.0, 5));
    }

    #[test]
    fn renderings() {
        let g = build_gcf(5.0, 4.0, 10).unwrap();
        assert_eq!(g.compact(2), "1/(-4 + 1/(-4 + ...))");
        let g3 = build_gcf(7.0, 4.0, 2).unwrap();
        assert_eq!(g3.compact(5), "3/(-4 + 3/-4)");
        assert_eq!(build_gcf(7.0, 4.0, 1).unwrap().compact(1), "3/-4");
        let nested = g.nested(2);
        assert!(nested.starts_with("1\n"));
        assert!(nested.contains("-4 + 1"));
        assert!(nested.trim_end().ends_with("-4 + ..."));
    }

    #[test]
    fn truncation_list() {
        let g = build_gcf(5.0, 4.0, 3).unwrap();
        let t = truncations(&g).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0], -0.25);
        assert_eq!(t[2], evaluate_gcf(&g).unwrap());
    }

    proptest! {
        #[test]
        fn truncations_track_iterates(x in 0.1f64..1e3, t in 0.1f64..5.0) {
            let b = t * x.sqrt();
            prop_assume!((t - 2.0).abs() > 1e-3);
            prop_assert!(gcf_iteration_equivalence(x, b, 50));
        }

        #[test]
        fn deep_truncation_converges(x in 0.1f64..1e3, t in 0.5f64..5.0) {
            let b = t * x.sqrt();
            let g = build_gcf(x, b, 200).unwrap();
            let v = evaluate_gcf(&g).unwrap();
            prop_assert!((v - (b / 2.0 - x.sqrt())).abs() < 1e-9 * (1.0 + x.sqrt()));
        }
    }
}
