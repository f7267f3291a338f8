use std::fmt;
use std::sync::Arc;

use super::FemError;
use crate::mesh::TetMesh;
use crate::vec3::Vec3;

pub type Mat3 = [[f64; 3]; 3];

/// Coefficient given as a constant or as a function of position and time.
#[derive(Clone)]
pub enum Field<T> {
    Constant(T),
    Function {
        f: Arc<dyn Fn(Vec3, f64) -> T + Send + Sync>,
        time_dependent: bool,
    },
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<Vec3>;
pub type TensorField = Field<Mat3>;

impl<T: fmt::Debug> fmt::Debug for Field<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Field::Function { time_dependent, .. } => f
                .debug_struct("Function")
                .field("time_dependent", time_dependent)
                .finish(),
        }
    }
}

impl<T: Copy> Field<T> {
    pub fn function<F>(f: F, time_dependent: bool) -> Field<T>
    where
        F: Fn(Vec3, f64) -> T + Send + Sync + 'static,
    {
        Field::Function {
            f: Arc::new(f),
            time_dependent,
        }
    }

    #[inline]
    pub fn eval(&self, x: Vec3, t: f64) -> T {
        match self {
            Field::Constant(v) => *v,
            Field::Function { f, .. } => f(x, t),
        }
    }

    pub fn constant_value(&self) -> Option<T> {
        match self {
            Field::Constant(v) => Some(*v),
            Field::Function { .. } => None,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Field::Function { time_dependent: true, .. })
    }
}

impl ScalarField {
    pub fn zero() -> ScalarField {
        Field::Constant(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Field::Constant(v) if *v == 0.0)
    }
}

impl VectorField {
    pub fn zero() -> VectorField {
        Field::Constant([0.0; 3])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Field::Constant(v) if *v == [0.0; 3])
    }
}

impl TensorField {
    pub fn isotropic(d: f64) -> TensorField {
        Field::Constant([[d, 0.0, 0.0], [0.0, d, 0.0], [0.0, 0.0, d]])
    }

    /// Isotropic tensor from a scalar field.
    pub fn from_scalar(d: ScalarField) -> TensorField {
        match d {
            Field::Constant(v) => TensorField::isotropic(v),
            Field::Function { f, time_dependent } => Field::Function {
                f: Arc::new(move |x, t| {
                    let v = f(x, t);
                    [[v, 0.0, 0.0], [0.0, v, 0.0], [0.0, 0.0, v]]
                }),
                time_dependent,
            },
        }
    }
}

fn is_spd(m: &Mat3) -> bool {
    let sym = (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= 1e-12 * (m[i][j].abs() + m[j][i].abs()).max(1e-300)));
    let d1 = m[0][0];
    let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    sym && d1 > 0.0 && d2 > 0.0 && d3 > 0.0
}

fn sample_points(mesh: &TetMesh, region: Option<u8>) -> impl Iterator<Item = Vec3> + '_ {
    (0..mesh.cells.len())
        .filter(move |&c| region.is_none_or(|r| mesh.regions[c] == r))
        .map(|c| {
            let p = mesh.cell_points(c);
            std::array::from_fn(|k| 0.25 * (p[0][k] + p[1][k] + p[2][k] + p[3][k]))
        })
}

/// Checks that a diffusion tensor is symmetric positive definite at every
/// cell centroid of `region` at time `t`.
pub fn check_diffusion(d: &TensorField, mesh: &TetMesh, region: Option<u8>, t: f64) -> Result<(), FemError> {
    if let Some(m) = d.constant_value() {
        return if is_spd(&m) { Ok(()) } else { Err(FemError::NotSpd { point: [f64::NAN; 3] }) };
    }
    for x in sample_points(mesh, region) {
        if !is_spd(&d.eval(x, t)) {
            return Err(FemError::NotSpd { point: x });
        }
    }
    Ok(())
}

/// Checks that an exchange coefficient is nonnegative at every vertex.
pub fn check_nonnegative(xi: &ScalarField, points: &[Vec3], t: f64) -> Result<(), FemError> {
    for &x in points {
        let v = xi.eval(x, t);
        if !(v >= 0.0) {
            return Err(FemError::NegativeCoefficient { point: x, value: v });
        }
    }
    Ok(())
}
