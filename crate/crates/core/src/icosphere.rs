//! Subdivided icosahedron used to sample unit directions.

use std::collections::HashMap;

use nalgebra::{Matrix3, Vector3};

use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct Icosphere<T: Real> {
    pub vertices: Vec<Vector3<T>>,
    pub faces: Vec<[usize; 3]>,
}

impl<T: Real> Icosphere<T> {
    /// Icosahedron subdivided `level` times: `20 * 4^level` faces and
    /// `10 * 4^level + 2` unit-length vertices.
    pub fn new(level: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vector3<f64>> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|v| Vector3::from(*v).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..level {
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
                let key = (a.min(b), a.max(b));
                *cache.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        Self {
            vertices: vertices.iter().map(|v| v.map(T::lit)).collect(),
            faces,
        }
    }

    /// Smallest subdivision with at least `n` vertices (level 3 and up
    /// gives 642, 2562, ...).
    pub fn with_min_directions(n: usize) -> Self {
        let mut level = 0;
        while 10 * 4usize.pow(level) + 2 < n {
            level += 1;
        }
        Self::new(level)
    }

    /// Volume enclosed by the star-shaped surface that places each vertex
    /// at distance `radii[i]` from the origin, as a sum of origin tetrahedra.
    pub fn radial_volume(&self, radii: &[T]) -> T {
        let sixth = T::one() / T::lit(6.0);
        self.faces
            .iter()
            .map(|[a, b, c]| {
                let m = Matrix3::from_columns(&[
                    self.vertices[*a] * radii[*a],
                    self.vertices[*b] * radii[*b],
                    self.vertices[*c] * radii[*c],
                ]);
                m.determinant().abs() * sixth
            })
            .fold(T::zero(), |acc, v| acc + v)
    }
}
