use crate::error::{Error, Result};
use crate::mesh::element::EXTRAPOLATION_LIMIT;
use crate::mesh::{dot, sub, ElementGeometry, Mesh, Point};
use crate::mortar::NewtonSettings;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub xi: [f64; 2],
    pub converged: bool,
    pub iterations: usize,
}

/// Closest point of element `elem` to `x`, by Gauss-Newton from the reference center.
///
/// The residual is the tangential component of `x - x(xi)` expressed in reference
/// coordinates, i.e. the length of the next Newton step.
pub fn project_point_newton(mesh: &Mesh, elem: usize, x: Point, newton: &NewtonSettings) -> Result<Projection> {
    if elem >= mesh.n_elements() {
        return Err(Error::InvalidArgument(format!("element {elem} out of range")));
    }
    Ok(project_on(&mesh.geometry(elem), x, newton))
}

pub(crate) fn project_on(geom: &ElementGeometry, x: Point, newton: &NewtonSettings) -> Projection {
    let kind = geom.kind;
    let mut xi = kind.ref_center();
    let fail = |xi, iterations| Projection {
        xi,
        converged: false,
        iterations,
    };
    for it in 0..=newton.max_iter {
        let d = sub(x, geom.map(xi));
        let t = geom.tangents(xi);
        let step = if kind.is_segment() {
            let g = dot(t[0], t[0]);
            if !(g > 0.0) {
                return fail(xi, it);
            }
            [dot(t[0], d) / g, 0.0]
        } else {
            let (g00, g01, g11) = (dot(t[0], t[0]), dot(t[0], t[1]), dot(t[1], t[1]));
            let det = g00 * g11 - g01 * g01;
            if !(det > 0.0) {
                return fail(xi, it);
            }
            let (r0, r1) = (dot(t[0], d), dot(t[1], d));
            [(g11 * r0 - g01 * r1) / det, (g00 * r1 - g01 * r0) / det]
        };
        if step[0].hypot(step[1]) < newton.tol {
            return Projection {
                xi,
                converged: true,
                iterations: it,
            };
        }
        if it == newton.max_iter {
            break;
        }
        xi = [xi[0] + step[0], xi[1] + step[1]];
        if xi[0].abs() > EXTRAPOLATION_LIMIT || xi[1].abs() > EXTRAPOLATION_LIMIT {
            return fail(xi, it + 1);
        }
    }
    fail(xi, newton.max_iter)
}
