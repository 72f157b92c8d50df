use crate::error::{Error, Result};
use crate::mesh::element::ElementKind;

/// Points in reference coordinates with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss rule with `n_points` points for the reference domain of `kind`.
///
/// Segments accept 1 to 32 points, quadrilaterals the tensor squares of those
/// (1, 4, 9, ..., 1024) and triangles the symmetric rules with 1, 3, 6, 7 or 12 points.
pub fn gauss_rule(kind: ElementKind, n_points: usize) -> Result<QuadratureRule> {
    match kind {
        ElementKind::Seg2 | ElementKind::Seg3 => {
            let (x, w) = gauss_legendre(n_points)?;
            Ok(QuadratureRule {
                points: x.iter().map(|&p| [p, 0.0]).collect(),
                weights: w,
                degree: 2 * n_points - 1,
            })
        }
        ElementKind::Quad4 | ElementKind::Quad8 => {
            let k = (n_points as f64).sqrt().round() as usize;
            if k * k != n_points {
                return Err(Error::InvalidArgument(format!(
                    "quadrilateral rules need a square point count, got {n_points}"
                )));
            }
            let (x, w) = gauss_legendre(k)?;
            let mut points = Vec::with_capacity(n_points);
            let mut weights = Vec::with_capacity(n_points);
            for j in 0..k {
                for i in 0..k {
                    points.push([x[i], x[j]]);
                    weights.push(w[i] * w[j]);
                }
            }
            Ok(QuadratureRule {
                points,
                weights,
                degree: 2 * k - 1,
            })
        }
        ElementKind::Tri3 => triangle_rule(n_points),
    }
}

/// Largest supported one-dimensional Gauss-Legendre rule.
pub const MAX_GAUSS_1D: usize = 32;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=MAX_GAUSS_1D).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Legendre rule with {n} points not supported (1..=32)"
        )));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}

// Symmetric orbits (weights normalised to the unit-area triangle).
fn triangle_rule(n_points: usize) -> Result<QuadratureRule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut centroid = |w: f64| {
        points.push([1.0 / 3.0, 1.0 / 3.0]);
        weights.push(w);
    };
    let degree;
    let mut orbits3: Vec<(f64, f64)> = Vec::new();
    let mut orbits6: Vec<(f64, f64, f64)> = Vec::new();
    match n_points {
        1 => {
            centroid(1.0);
            degree = 1;
        }
        3 => {
            orbits3.push((1.0 / 6.0, 1.0 / 3.0));
            degree = 2;
        }
        6 => {
            orbits3.push((0.445948490915965, 0.223381589678011));
            orbits3.push((0.091576213509771, 0.109951743655322));
            degree = 4;
        }
        7 => {
            centroid(0.225);
            orbits3.push((0.470142064105115, 0.132394152788506));
            orbits3.push((0.101286507323456, 0.125939180544827));
            degree = 5;
        }
        12 => {
            orbits3.push((0.249286745170910, 0.116786275726379));
            orbits3.push((0.063089014491502, 0.050844906370207));
            orbits6.push((0.053145049844817, 0.310352451033784, 0.082851075618374));
            degree = 6;
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "triangle rule with {n_points} points not supported (1, 3, 6, 7, 12)"
            )))
        }
    }
    for (a, w) in orbits3 {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            points.push(p);
            weights.push(w);
        }
    }
    for (a, b, w) in orbits6 {
        let c = 1.0 - a - b;
        for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
            points.push(p);
            weights.push(w);
        }
    }
    for w in &mut weights {
        *w *= 0.5;
    }
    Ok(QuadratureRule { points, weights, degree })
}

/// Smallest supported rule for `kind` that integrates polynomials of `degree` exactly.
pub fn rule_for_degree(kind: ElementKind, degree: usize) -> Result<QuadratureRule> {
    match kind {
        ElementKind::Tri3 => {
            let n = match degree {
                0 | 1 => 1,
                2 => 3,
                3 | 4 => 6,
                5 => 7,
                6 => 12,
                _ => return Err(Error::InvalidArgument(format!("no triangle rule of degree {degree}"))),
            };
            triangle_rule(n)
        }
        _ => {
            let k = degree / 2 + 1;
            let n = if kind.is_quad() { k * k } else { k };
            gauss_rule(kind, n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Exact integrals of x^a y^b over each reference domain.
    fn segment_monomial(a: usize) -> f64 {
        if a % 2 == 1 {
            0.0
        } else {
            2.0 / (a as f64 + 1.0)
        }
    }

    fn triangle_monomial(a: usize, b: usize) -> f64 {
        // a! b! / (a + b + 2)!
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn two_point_gauss_from_moment_equations() {
        // Symmetric nodes +-x with equal weights w: 2w = 2 and 2w x^2 = 2/3.
        let w_expected = 1.0;
        let x_expected = (1.0f64 / 3.0).sqrt();
        let rule = gauss_rule(ElementKind::Seg2, 2).unwrap();
        assert!((rule.points[0][0] + x_expected).abs() < 1e-15);
        assert!((rule.points[1][0] - x_expected).abs() < 1e-15);
        assert!((rule.points[1][0] - 0.57735026919).abs() < 1e-11);
        for w in &rule.weights {
            assert!((w - w_expected).abs() < 1e-15);
        }
    }

    #[test]
    fn quad_rule_is_tensor_product() {
        let rule = gauss_rule(ElementKind::Quad4, 4).unwrap();
        assert_eq!(rule.len(), 4);
        assert!((rule.weights.iter().sum::<f64>() - 4.0).abs() < 1e-14);
        assert!(gauss_rule(ElementKind::Quad4, 5).is_err());
    }

    #[test]
    fn triangle_centroid_rule() {
        let rule = gauss_rule(ElementKind::Tri3, 1).unwrap();
        assert_eq!(rule.points, vec![[1.0 / 3.0, 1.0 / 3.0]]);
        assert_eq!(rule.weights, vec![0.5]);
    }

    #[test]
    fn unsupported_counts() {
        assert!(gauss_rule(ElementKind::Seg2, 0).is_err());
        assert!(gauss_rule(ElementKind::Seg2, 33).is_err());
        assert!(gauss_rule(ElementKind::Tri3, 4).is_err());
    }

    #[test]
    fn segment_rules_exact_to_design_degree() {
        for n in 1..=32 {
            let rule = gauss_rule(ElementKind::Seg3, n).unwrap();
            assert!(rule.weights.iter().all(|w| *w > 0.0));
            for a in 0..=rule.degree {
                let q: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32)).sum();
                assert!((q - segment_monomial(a)).abs() <= 1e-13, "n={n} a={a}: {q}");
            }
        }
    }

    #[test]
    fn quad_rules_exact_to_design_degree() {
        for k in 1..=10 {
            let rule = gauss_rule(ElementKind::Quad8, k * k).unwrap();
            for a in 0..=rule.degree {
                for b in 0..=rule.degree {
                    let q: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                    let exact = segment_monomial(a) * segment_monomial(b);
                    assert!((q - exact).abs() <= 1e-13, "k={k} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn triangle_rules_exact_to_design_degree() {
        for n in [1, 3, 6, 7, 12] {
            let rule = gauss_rule(ElementKind::Tri3, n).unwrap();
            assert!(rule.weights.iter().all(|w| *w > 0.0));
            assert!((rule.weights.iter().sum::<f64>() - 0.5).abs() <= 1e-13);
            for a in 0..=rule.degree {
                for b in 0..=(rule.degree - a) {
                    let q: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                    let exact = triangle_monomial(a, b);
                    assert!((q - exact).abs() <= 1e-13, "n={n} a={a} b={b}: {q} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn rule_for_degree_picks_exact_rule() {
        assert_eq!(rule_for_degree(ElementKind::Seg2, 3).unwrap().len(), 2);
        assert_eq!(rule_for_degree(ElementKind::Quad4, 4).unwrap().len(), 9);
        assert_eq!(rule_for_degree(ElementKind::Tri3, 4).unwrap().len(), 6);
    }
}
