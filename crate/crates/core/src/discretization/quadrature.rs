//! Simplex quadrature rules used by the assemblers.
//!
//! Stiffness integrands are products of constant and linear factors, so a
//! 1-point centroid rule is exact. Load integrands get a degree-2 rule: edge
//! midpoints on triangles, the symmetric 4-point rule on tetrahedra. Weights
//! are in reference coordinates and sum to the reference measure (1/2 for the
//! triangle, 1/6 for the tetrahedron); multiplying by the element Jacobian
//! determinant yields physical weights.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadraturePurpose {
    Stiffness,
    Load,
    /// Degree-3 alternative for the load vector. The baseline rules follow
    /// the published setup, where the stencil-interpolated source makes the
    /// load integrand cubic; this rule removes that committed quadrature
    /// error.
    LoadCubic,
}

/// Barycentric points and reference weights of a simplex rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

// Degree-2 tetrahedron rule abscissae: barycentric (a, b, b, b) and
// permutations.
const TET4_A: f64 = 0.5854101966249685;
const TET4_B: f64 = 0.1381966011250105;

pub fn quadrature_rule(dim: usize, purpose: QuadraturePurpose) -> QuadratureRule {
    match (dim, purpose) {
        (2, QuadraturePurpose::Stiffness) => QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]],
            weights: vec![0.5],
        },
        (2, QuadraturePurpose::Load) => QuadratureRule {
            points: vec![
                [0.5, 0.5, 0.0, 0.0],
                [0.0, 0.5, 0.5, 0.0],
                [0.5, 0.0, 0.5, 0.0],
            ],
            weights: vec![1.0 / 6.0; 3],
        },
        (3, QuadraturePurpose::Stiffness) => QuadratureRule {
            points: vec![[0.25, 0.25, 0.25, 0.25]],
            weights: vec![1.0 / 6.0],
        },
        (3, QuadraturePurpose::Load) => QuadratureRule {
            points: vec![
                [TET4_A, TET4_B, TET4_B, TET4_B],
                [TET4_B, TET4_A, TET4_B, TET4_B],
                [TET4_B, TET4_B, TET4_A, TET4_B],
                [TET4_B, TET4_B, TET4_B, TET4_A],
            ],
            weights: vec![1.0 / 24.0; 4],
        },
        (2, QuadraturePurpose::LoadCubic) => {
            let third = 1.0 / 3.0;
            QuadratureRule {
                points: vec![
                    [third, third, third, 0.0],
                    [0.6, 0.2, 0.2, 0.0],
                    [0.2, 0.6, 0.2, 0.0],
                    [0.2, 0.2, 0.6, 0.0],
                ],
                weights: vec![-27.0 / 96.0, 25.0 / 96.0, 25.0 / 96.0, 25.0 / 96.0],
            }
        }
        (3, QuadraturePurpose::LoadCubic) => {
            let (a, b) = (0.5, 1.0 / 6.0);
            QuadratureRule {
                points: vec![
                    [0.25, 0.25, 0.25, 0.25],
                    [a, b, b, b],
                    [b, a, b, b],
                    [b, b, a, b],
                    [b, b, b, a],
                ],
                weights: vec![-2.0 / 15.0, 3.0 / 40.0, 3.0 / 40.0, 3.0 / 40.0, 3.0 / 40.0],
            }
        }
        _ => panic!("no quadrature rule for dimension {dim}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_2d(rule: &QuadratureRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        // Reference triangle (0,0), (1,0), (0,1); barycentric (b0, b1, b2)
        // maps to (b1, b2), and the reference weights integrate directly.
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum()
    }

    #[test]
    fn rules_integrate_unity_to_reference_measure() {
        for purpose in [
            QuadraturePurpose::Stiffness,
            QuadraturePurpose::Load,
            QuadraturePurpose::LoadCubic,
        ] {
            let r2 = quadrature_rule(2, purpose);
            let total: f64 = r2.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-15);
            let r3 = quadrature_rule(3, purpose);
            let total: f64 = r3.weights.iter().sum();
            assert!((total - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_load_rules_are_degree_three_exact() {
        let rule = quadrature_rule(2, QuadraturePurpose::LoadCubic);
        // integral of x^3 over the reference triangle is 1/20, of x^2 y is
        // 1/60.
        let got = integrate_2d(&rule, |x, _| x * x * x);
        assert!((got - 1.0 / 20.0).abs() < 1e-14);
        let got = integrate_2d(&rule, |x, y| x * x * y);
        assert!((got - 1.0 / 60.0).abs() < 1e-14);

        let rule = quadrature_rule(3, QuadraturePurpose::LoadCubic);
        // integral of x^3 over the reference tet is 1/120.
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[1] * p[1] * p[1])
            .sum();
        assert!((got - 1.0 / 120.0).abs() < 1e-14);
        // integral of x y z is 1/720.
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[1] * p[2] * p[3])
            .sum();
        assert!((got - 1.0 / 720.0).abs() < 1e-14);
    }

    #[test]
    fn load_rule_is_degree_two_exact_in_2d() {
        let rule = quadrature_rule(2, QuadraturePurpose::Load);
        // integral of x*y over the reference triangle is 1/24.
        let got = integrate_2d(&rule, |x, y| x * y);
        assert!((got - 1.0 / 24.0).abs() < 1e-15);
        let got = integrate_2d(&rule, |x, _| x * x);
        assert!((got - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn centroid_rule_exact_for_linears_on_tet() {
        let rule = quadrature_rule(3, QuadraturePurpose::Stiffness);
        // integral of x over the reference tet is 1/24.
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[1])
            .sum();
        assert!((got - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn tet_load_rule_is_degree_two_exact() {
        let rule = quadrature_rule(3, QuadraturePurpose::Load);
        // integral of x^2 over the reference tet is 1/60.
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[1] * p[1])
            .sum();
        assert!((got - 1.0 / 60.0).abs() < 1e-14);
        // integral of x*y is 1/120.
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[1] * p[2])
            .sum();
        assert!((got - 1.0 / 120.0).abs() < 1e-14);
    }
}
