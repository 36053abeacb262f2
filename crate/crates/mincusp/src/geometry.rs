//! Numeric hyperbolic geometry: the complex dilogarithm and Clausen function,
//! hyperbolic volumes of the census manifolds by two independent routes
//! (a closed form in Clausen values and a dilogarithm formula for a single
//! truncated tetrahedron), closed-form shape data of the tetrahedra, and a
//! floating-point rank/signature certificate for the 7x7 Gram matrix.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("k must be an integer >= 2, got {0}")]
    UnsupportedK(u64),
    #[error("dilogarithm argument {0} lies outside the closed unit disk")]
    DomainError(Complex64),
    #[error("dihedral angles do not define a hyperbolic tetrahedron: {0}")]
    NonRealizableAngles(String),
    #[error("independent volume computations disagree: {0}")]
    CrossCheckError(String),
    #[error("hyperbolic trigonometric identity violated: {0}")]
    ConsistencyError(String),
    #[error("Gram matrix signature check failed: {0}")]
    SignatureError(String),
}

/// Coefficients c_n = B_n / (n+1)! of the expansion
/// Li2(z) = sum_{n>=0} c_n u^{n+1}, u = -ln(1-z),
/// with the B_1 = -1/2 convention. Odd coefficients beyond n = 1 vanish.
const DILOG_COEFFS: [f64; 45] = [
    1.0,
    -0.25,
    2.7777777777777777777778e-2,
    0.0,
    -2.7777777777777777777778e-4,
    0.0,
    4.724111866969009826153e-6,
    0.0,
    -9.185773074661963550852e-8,
    0.0,
    1.897886998897099907201e-9,
    0.0,
    -4.064761645144225526806e-11,
    0.0,
    8.921691020456452555218e-13,
    0.0,
    -1.993929586072107568724e-14,
    0.0,
    4.51898002961991819165e-16,
    0.0,
    -1.035651761218124701448e-17,
    0.0,
    2.39521862102618674574e-19,
    0.0,
    -5.581785874325009336283e-21,
    0.0,
    1.309150755418321285812e-22,
    0.0,
    -3.087419802426740293242e-24,
    0.0,
    7.315975652702203420358e-26,
    0.0,
    -1.740845657234000740989e-27,
    0.0,
    4.157635644613899719618e-29,
    0.0,
    -9.962148488284622103194e-31,
    0.0,
    2.394034424896165300521e-32,
    0.0,
    -5.768347355367390084292e-34,
    0.0,
    1.393179479647007977828e-35,
    0.0,
    -3.372121965485089470468e-37,
];

/// Raw series in u = -ln(1-z); accurate for |u| up to about 2.3.
fn dilog_u_series(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut term = u;
    for &c in DILOG_COEFFS.iter() {
        if c != 0.0 {
            acc += term * c;
        }
        term *= u;
    }
    acc
}

/// Dilogarithm on the whole plane (principal branch, cut along [1, inf)).
/// The unit circle, where all our arguments live, is well inside the
/// accurate region of every branch taken here.
fn dilog_any(z: Complex64) -> Complex64 {
    let pi2_6 = PI * PI / 6.0;
    if z.norm() > 1.0 + 1e-9 {
        // Inversion: Li2(z) + Li2(1/z) = -pi^2/6 - ln^2(-z)/2.
        let l = (-z).ln();
        return Complex64::new(-pi2_6, 0.0) - 0.5 * l * l - dilog_any(1.0 / z);
    }
    if (z - Complex64::new(1.0, 0.0)).norm() < 1e-14 {
        return Complex64::new(pi2_6, 0.0);
    }
    if z.re > 0.5 {
        // Reflection: Li2(z) = pi^2/6 - ln(z) ln(1-z) - Li2(1-z).
        let w = Complex64::new(1.0, 0.0) - z;
        return Complex64::new(pi2_6, 0.0) - z.ln() * w.ln() - dilog_u_series(w);
    }
    dilog_u_series(z)
}

/// Complex dilogarithm Li2 on the closed unit disk.
pub fn dilog(z: Complex64) -> Result<Complex64, GeometryError> {
    if z.norm() > 1.0 + 1e-12 {
        return Err(GeometryError::DomainError(z));
    }
    Ok(dilog_any(z))
}

/// Clausen function Cl2(theta) = sum_{n>=1} sin(n theta)/n^2
/// = Im Li2(e^{i theta}).
pub fn clausen(theta: f64) -> f64 {
    dilog_any(Complex64::from_polar(1.0, theta)).im
}

// ---------------------------------------------------------------------------
// Tetrahedron volume from dihedral angles
// ---------------------------------------------------------------------------

/// The six dihedral angles of a (possibly truncated/ideal) tetrahedron with
/// vertices 1..4, indexed by the edge joining the named vertex pair.
#[derive(Debug, Clone, Copy)]
pub struct DihedralAngles {
    pub theta12: f64,
    pub theta13: f64,
    pub theta14: f64,
    pub theta23: f64,
    pub theta24: f64,
    pub theta34: f64,
}

impl DihedralAngles {
    /// The cell of the k-th census member: a tetrahedron with one ideal
    /// vertex (vertex 4) and threefold rotational symmetry, carrying angle
    /// pi/3k on the three edges among the truncated vertices 1,2,3 and
    /// pi/3 on the three edges into the ideal vertex.
    pub fn census_tetra(k: u64) -> Self {
        let t = PI / (3.0 * k as f64);
        let p3 = PI / 3.0;
        DihedralAngles {
            theta12: t,
            theta13: t,
            theta23: t,
            theta14: p3,
            theta24: p3,
            theta34: p3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TetVolume {
    /// The two roots of the quadratic attached to the angle data.
    pub z1: Complex64,
    pub z2: Complex64,
    /// Hyperbolic volume of the tetrahedron.
    pub volume: f64,
}

/// Volume of the generalized hyperbolic tetrahedron with the given dihedral
/// angles, as one dilogarithm term per root of the associated quadratic.
///
/// Realizability is certified by the angle Gram matrix (diagonal 1, entry
/// (i,j) equal to -cos of the angle on the edge complementary to {i,j})
/// having negative determinant.
pub fn tet_volume_from_angles(angles: &DihedralAngles) -> Result<TetVolume, GeometryError> {
    let th = [
        angles.theta12,
        angles.theta13,
        angles.theta14,
        angles.theta23,
        angles.theta24,
        angles.theta34,
    ];
    // Edge of each index pair, and the complementary (opposite) edge:
    // order theta12, theta13, theta14, theta23, theta24, theta34; opposite
    // pairs are (12,34), (13,24), (14,23).
    let opp = [5usize, 4, 3, 2, 1, 0];

    // Angle Gram matrix and its determinant.
    let mut g = [[0.0f64; 4]; 4];
    let pair_index = |i: usize, j: usize| -> usize {
        match (i.min(j), i.max(j)) {
            (0, 1) => 0,
            (0, 2) => 1,
            (0, 3) => 2,
            (1, 2) => 3,
            (1, 3) => 4,
            (2, 3) => 5,
            _ => unreachable!(),
        }
    };
    for i in 0..4 {
        for j in 0..4 {
            g[i][j] = if i == j {
                1.0
            } else {
                -th[opp[pair_index(i, j)]].cos()
            };
        }
    }
    let det = det4x4(&g);
    if det >= 0.0 {
        return Err(GeometryError::NonRealizableAngles(format!(
            "angle Gram determinant {det} is not negative"
        )));
    }
    let sqrt_det = Complex64::new(0.0, (-det).sqrt());

    let ei = |t: f64| Complex64::from_polar(1.0, t);
    let (a, b, c) = (ei(angles.theta12), ei(angles.theta13), ei(angles.theta14));
    let (d, e, f) = (ei(angles.theta34), ei(angles.theta24), ei(angles.theta23));

    let den = a * d
        + b * e
        + c * f
        + a * b * f
        + a * c * e
        + b * c * d
        + d * e * f
        + a * b * c * d * e * f;
    let s = angles.theta12.sin() * angles.theta34.sin()
        + angles.theta13.sin() * angles.theta24.sin()
        + angles.theta14.sin() * angles.theta23.sin();

    let z1 = -2.0 * (s - sqrt_det) / den;
    let z2 = -2.0 * (s + sqrt_det) / den;

    let u_at = |z: Complex64| -> Complex64 {
        let li = dilog_any;
        0.5 * (li(z) + li(a * b * d * e * z) + li(a * c * d * f * z) + li(b * c * e * f * z)
            - li(-a * b * c * z)
            - li(-a * e * f * z)
            - li(-b * d * f * z)
            - li(-c * d * e * z))
    };
    let volume = 0.5 * (u_at(z1) - u_at(z2)).im;
    if !volume.is_finite() || volume <= 0.0 {
        return Err(GeometryError::NonRealizableAngles(format!(
            "volume formula produced {volume}"
        )));
    }
    Ok(TetVolume { z1, z2, volume })
}

fn det4x4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..4 {
            let fac = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= fac * a[col][c];
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// Census volumes
// ---------------------------------------------------------------------------

/// Hyperbolic volume of the k-th one-cusp census member, by the closed form
/// (3k/2) [Cl2(2pi/3 + 2pi/3k) + 2 Cl2(pi/3) + Cl2(2pi/3 - 2pi/3k)],
/// cross-checked internally against 2k times the tetrahedron volume.
pub fn census_volume(k: u64) -> Result<f64, GeometryError> {
    if k < 2 {
        return Err(GeometryError::UnsupportedK(k));
    }
    let t = 2.0 * PI / (3.0 * k as f64);
    let closed = 1.5
        * (k as f64)
        * (clausen(2.0 * PI / 3.0 + t) + 2.0 * clausen(PI / 3.0) + clausen(2.0 * PI / 3.0 - t));

    let tet = tet_volume_from_angles(&DihedralAngles::census_tetra(k))?;
    let decomposed = 2.0 * (k as f64) * tet.volume;
    if (closed - decomposed).abs() > 1e-10 * closed.max(1.0) {
        return Err(GeometryError::CrossCheckError(format!(
            "k={k}: closed form {closed} vs tetrahedral decomposition {decomposed}"
        )));
    }
    Ok(closed)
}

/// Elementary volume bounds (9/2) k <= vol <= pi^2 k for the census members.
pub fn census_volume_bounds(k: u64) -> (f64, f64) {
    (4.5 * k as f64, PI * PI * k as f64)
}

// ---------------------------------------------------------------------------
// Shape parameters of the truncated tetrahedron
// ---------------------------------------------------------------------------

/// Closed-form hyperbolic data of the k-th tetrahedron, all as cosh values:
/// `d` the distance between the boundary triangle and the cusp cross-section
/// direction, `l1` and `l2` the two boundary-geodesic half-lengths entering
/// the Gram matrix, and `p` the common perpendicular length tied to `l1` by
/// a Lambert quadrilateral.
#[derive(Debug, Clone, Copy)]
pub struct TetraShape {
    pub k: u64,
    /// Dihedral angle pi/3k along the edges joining the truncated vertices.
    pub theta: f64,
    pub cosh_d: f64,
    pub cosh_l1: f64,
    pub cosh_l2: f64,
    pub cosh_p: f64,
}

pub fn tetra_shape(k: u64) -> Result<TetraShape, GeometryError> {
    if k < 2 {
        return Err(GeometryError::UnsupportedK(k));
    }
    let theta = PI / (3.0 * k as f64);
    let (s, c) = theta.sin_cos();
    let c2 = (2.0 * theta).cos();
    let cosh_d = (0.5 + c * c) / (s * s);
    let cosh_l2 = (0.5 + c * c) / (0.5 + c2);
    let root = (1.0 + 2.0 * c2).sqrt();
    let cosh_l1 = 3.0 * c / root;
    let cosh_p = 3.0 * c / (s * root);

    // Lambert quadrilateral: cosh l1 = sin(theta) cosh p.
    if (cosh_l1 - s * cosh_p).abs() > 1e-12 * cosh_l1 {
        return Err(GeometryError::ConsistencyError(format!(
            "cosh l1 = {cosh_l1} but sin(theta) cosh p = {}",
            s * cosh_p
        )));
    }
    // Algebraic forms used by the exact Gram matrix, with alpha = 2cos(theta):
    // (2 cosh l1)^2 = 9 alpha^2/(alpha^2 - 1), 2 cosh l2 = (alpha^2 + 2)/(alpha^2 - 1).
    let alpha_sq = 4.0 * c * c;
    let l1t = 9.0 * alpha_sq / (alpha_sq - 1.0);
    if (4.0 * cosh_l1 * cosh_l1 - l1t).abs() > 1e-10 * l1t.abs() {
        return Err(GeometryError::ConsistencyError(format!(
            "(2 cosh l1)^2 = {} but 9 a^2/(a^2-1) = {}",
            4.0 * cosh_l1 * cosh_l1,
            l1t
        )));
    }
    let l2t = (alpha_sq + 2.0) / (alpha_sq - 1.0);
    if (2.0 * cosh_l2 - l2t).abs() > 1e-10 * l2t.abs() {
        return Err(GeometryError::ConsistencyError(format!(
            "2 cosh l2 = {} but (a^2+2)/(a^2-1) = {}",
            2.0 * cosh_l2,
            l2t
        )));
    }
    Ok(TetraShape {
        k,
        theta,
        cosh_d,
        cosh_l1,
        cosh_l2,
        cosh_p,
    })
}

// ---------------------------------------------------------------------------
// Numeric Gram signature
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GramSignature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    /// Face normals in Minkowski space R^{3,1} (signature +,+,+,-) whose
    /// pairwise inner products scaled into the matrix reproduce it.
    pub normals: Vec<[f64; 4]>,
}

/// The 7x7 Gram matrix of the k-th tetrahedron in floating point.
pub fn gram_numeric(k: u64) -> Result<[[f64; 7]; 7], GeometryError> {
    let shape = tetra_shape(k)?;
    let z = -2.0 * shape.theta.cos();
    let l1 = -2.0 * shape.cosh_l1;
    let l2 = -2.0 * shape.cosh_l2;
    let o = -1.0;
    Ok([
        [2.0, o, o, z, 0.0, 0.0, l1],
        [o, 2.0, o, z, l1, 0.0, 0.0],
        [o, o, 2.0, z, 0.0, l1, 0.0],
        [z, z, z, 2.0, 0.0, 0.0, 0.0],
        [0.0, l1, 0.0, 0.0, 2.0, l2, l2],
        [0.0, 0.0, l1, 0.0, l2, 2.0, l2],
        [l1, 0.0, 0.0, 0.0, l2, l2, 2.0],
    ])
}

/// Eigenvalue certificate that the 7x7 Gram matrix has rank 4 and signature
/// (3, 1), together with a factorization through 7 normal vectors in R^{3,1}.
pub fn gram_numeric_signature(k: u64) -> Result<GramSignature, GeometryError> {
    let g = gram_numeric(k)?;
    let m = nalgebra::DMatrix::<f64>::from_fn(7, 7, |i, j| g[i][j]);
    let eig = m.clone().symmetric_eigen();
    let tol = 1e-8 * m.norm();

    let mut pos: Vec<usize> = vec![];
    let mut neg: Vec<usize> = vec![];
    let mut zero = 0usize;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > tol {
            pos.push(i);
        } else if l < -tol {
            neg.push(i);
        } else {
            zero += 1;
        }
    }
    if pos.len() != 3 || neg.len() != 1 || zero != 3 {
        return Err(GeometryError::SignatureError(format!(
            "k={k}: eigenvalue signs ({}, {}, {}), expected (3, 1, 3)",
            pos.len(),
            neg.len(),
            zero
        )));
    }

    // Normal n_i = rows of  [sqrt(l_p) q_p | sqrt(-l_n) q_n]: then
    // G_ij = <n_i, n_j> in the (+,+,+,-) form.
    let mut normals = vec![[0.0f64; 4]; 7];
    for (slot, &idx) in pos.iter().chain(neg.iter()).enumerate() {
        let scale = eig.eigenvalues[idx].abs().sqrt();
        for r in 0..7 {
            normals[r][slot] = scale * eig.eigenvectors[(r, idx)];
        }
    }
    let mink = |x: &[f64; 4], y: &[f64; 4]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2] - x[3] * y[3];
    for i in 0..7 {
        for j in 0..7 {
            let rec = mink(&normals[i], &normals[j]);
            if (rec - g[i][j]).abs() > 1e-8 * m.norm() {
                return Err(GeometryError::SignatureError(format!(
                    "k={k}: factorization misses entry ({i},{j}): {rec} vs {}",
                    g[i][j]
                )));
            }
        }
    }
    Ok(GramSignature {
        positive: 3,
        negative: 1,
        zero,
        normals,
    })
}
