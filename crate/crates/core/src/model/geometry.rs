//! Internal coordinates (bond length, bond angle, torsion) of Cartesian
//! atom positions and their analytic Cartesian gradients.

use nalgebra::Vector3;

use super::{wrap_angle, GeometryError};

/// Below this sine the bond angle is treated as collinear.
const COLLINEAR_SIN: f64 = 1e-10;

#[inline]
pub(crate) fn atom(coords: &[f64], i: usize) -> Vector3<f64> {
    Vector3::new(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2])
}

#[inline]
pub(crate) fn add_to(grad: &mut [f64], i: usize, v: &Vector3<f64>) {
    grad[3 * i] += v.x;
    grad[3 * i + 1] += v.y;
    grad[3 * i + 2] += v.z;
}

fn check_quad(coords: &[f64], quad: [usize; 4]) -> Result<(), GeometryError> {
    let n_atoms = coords.len() / 3;
    for (a, &i) in quad.iter().enumerate() {
        if i >= n_atoms {
            return Err(GeometryError::IndexOutOfRange { index: i, n_atoms });
        }
        if quad[..a].contains(&i) {
            return Err(GeometryError::RepeatedIndex(i));
        }
    }
    Ok(())
}

/// Distance between atoms `i` and `j` and the unit vector from `i` to `j`.
pub(crate) fn bond(coords: &[f64], i: usize, j: usize) -> (f64, Vector3<f64>) {
    let d = atom(coords, j) - atom(coords, i);
    let r = d.norm();
    (r, d / r)
}

/// Bond angle at `j` in the triple `i-j-k`, in `[0, π]`.
pub fn bond_angle(coords: &[f64], i: usize, j: usize, k: usize) -> Result<f64, GeometryError> {
    let u = atom(coords, i) - atom(coords, j);
    let v = atom(coords, k) - atom(coords, j);
    let s = u.cross(&v).norm();
    let c = u.dot(&v);
    if s <= COLLINEAR_SIN * u.norm() * v.norm() {
        return Err(GeometryError::Collinear([i, j, k]));
    }
    Ok(s.atan2(c))
}

/// Bond angle at `j` and its gradient with respect to atoms `i`, `j`, `k`.
pub(crate) fn bond_angle_with_gradient(
    coords: &[f64],
    i: usize,
    j: usize,
    k: usize,
) -> Result<(f64, [Vector3<f64>; 3]), GeometryError> {
    let u = atom(coords, i) - atom(coords, j);
    let v = atom(coords, k) - atom(coords, j);
    let (ru, rv) = (u.norm(), v.norm());
    let s = u.cross(&v).norm();
    let c = u.dot(&v);
    if s <= COLLINEAR_SIN * ru * rv {
        return Err(GeometryError::Collinear([i, j, k]));
    }
    let theta = s.atan2(c);
    let (sin_t, cos_t) = theta.sin_cos();
    let (uh, vh) = (u / ru, v / rv);
    let gi = (uh * cos_t - vh) / (ru * sin_t);
    let gk = (vh * cos_t - uh) / (rv * sin_t);
    let gj = -(gi + gk);
    Ok((theta, [gi, gj, gk]))
}

/// Torsion angle of the quadruple `a-b-c-d` in `(−π, π]`.
///
/// The planar trans (zig-zag) arrangement is the zero of this convention and
/// the planar cis arrangement sits on the wrap boundary. This is the usual
/// IUPAC dihedral shifted by a half turn.
pub fn dihedral_angle(coords: &[f64], quad: [usize; 4]) -> Result<f64, GeometryError> {
    check_quad(coords, quad)?;
    let [a, b, c, d] = quad;
    let b1 = atom(coords, b) - atom(coords, a);
    let b2 = atom(coords, c) - atom(coords, b);
    let b3 = atom(coords, d) - atom(coords, c);
    let n1 = b1.cross(&b2);
    let n2 = b2.cross(&b3);
    check_planes(&n1, &n2, &b1, &b2, &b3, quad)?;
    Ok(torsion_from_normals(&n1, &n2, &b2))
}

fn check_planes(
    n1: &Vector3<f64>,
    n2: &Vector3<f64>,
    b1: &Vector3<f64>,
    b2: &Vector3<f64>,
    b3: &Vector3<f64>,
    [a, b, c, d]: [usize; 4],
) -> Result<(), GeometryError> {
    if n1.norm() <= COLLINEAR_SIN * b1.norm() * b2.norm() {
        return Err(GeometryError::Collinear([a, b, c]));
    }
    if n2.norm() <= COLLINEAR_SIN * b2.norm() * b3.norm() {
        return Err(GeometryError::Collinear([b, c, d]));
    }
    Ok(())
}

fn torsion_from_normals(n1: &Vector3<f64>, n2: &Vector3<f64>, b2: &Vector3<f64>) -> f64 {
    let m1 = n1.cross(&b2.normalize());
    let iupac = m1.dot(n2).atan2(n1.dot(n2));
    // IUPAC puts trans at π; shift so trans is 0.
    wrap_angle(iupac + std::f64::consts::PI)
}

/// Torsion angle and its gradient with respect to the four atoms of `quad`.
pub(crate) fn dihedral_with_gradient(
    coords: &[f64],
    quad: [usize; 4],
) -> Result<(f64, [Vector3<f64>; 4]), GeometryError> {
    check_quad(coords, quad)?;
    let [a, b, c, d] = quad;
    let b1 = atom(coords, b) - atom(coords, a);
    let b2 = atom(coords, c) - atom(coords, b);
    let b3 = atom(coords, d) - atom(coords, c);
    let n1 = b1.cross(&b2);
    let n2 = b2.cross(&b3);
    check_planes(&n1, &n2, &b1, &b2, &b3, quad)?;
    let tau = torsion_from_normals(&n1, &n2, &b2);

    // Blondel-Karplus form; the half-turn shift does not change derivatives.
    let n1_sq = n1.norm_squared();
    let n2_sq = n2.norm_squared();
    let b2_len = b2.norm();
    let ga = n1 * (b2_len / n1_sq);
    let gd = n2 * (-b2_len / n2_sq);
    let f1 = b1.dot(&b2) / (b2_len * b2_len);
    let f3 = b3.dot(&b2) / (b2_len * b2_len);
    let gb = -ga - ga * f1 + gd * f3;
    let gc = -gd + ga * f1 - gd * f3;
    Ok((tau, [ga, gb, gc, gd]))
}
