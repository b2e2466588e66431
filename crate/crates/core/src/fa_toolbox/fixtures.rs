//! Small de Rham complexes used to exercise the toolbox: the gradient of a
//! path graph and the cochain complex of a union of unit cubes.

use std::collections::BTreeMap;

use faer::Mat;

use super::{FiniteComplex, Matrix};

/// A cell of a cubical set: base vertex and sorted list of spanned directions.
type Cell = ([i64; 3], Vec<usize>);

/// Coboundary (incidence) matrix of a path graph, edges oriented along the path.
pub fn path_graph_gradient(nodes: usize) -> Matrix {
    Mat::from_fn(nodes.saturating_sub(1), nodes, |e, v| {
        if v == e + 1 {
            1.0
        } else if v == e {
            -1.0
        } else {
            0.0
        }
    })
}

pub fn path_graph_complex(nodes: usize) -> FiniteComplex {
    FiniteComplex::unweighted(&[nodes, nodes.saturating_sub(1)], vec![path_graph_gradient(nodes)])
        .expect("path graph shapes are consistent")
}

fn faces_of_cube(base: [i64; 3]) -> Vec<Cell> {
    let mut out = Vec::new();
    for mask in 0u32..8 {
        let dirs: Vec<usize> = (0..3).filter(|d| mask & (1 << d) != 0).collect();
        let free: Vec<usize> = (0..3).filter(|d| mask & (1 << d) == 0).collect();
        for shift in 0u32..(1 << free.len()) {
            let mut v = base;
            for (k, &d) in free.iter().enumerate() {
                if shift & (1 << k) != 0 {
                    v[d] += 1;
                }
            }
            out.push((v, dirs.clone()));
        }
    }
    out
}

/// Boundary of a cell as signed lower-dimensional cells.
fn boundary(cell: &Cell) -> Vec<(Cell, f64)> {
    let (v, dirs) = cell;
    let mut out = Vec::new();
    for (idx, &d) in dirs.iter().enumerate() {
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        let rest: Vec<usize> = dirs.iter().cloned().filter(|&e| e != d).collect();
        let mut up = *v;
        up[d] += 1;
        out.push(((up, rest.clone()), sign));
        out.push(((*v, rest), -sign));
    }
    out
}

/// Cochain complex `C^0 -> C^1 -> C^2 -> C^3` of the union of the unit cubes
/// with the given lower corners, with identity Gram matrices.
pub fn cubical_complex(cubes: &[[i64; 3]]) -> FiniteComplex {
    let mut cells: [BTreeMap<Cell, usize>; 4] = Default::default();
    let mut all: Vec<Cell> = cubes.iter().flat_map(|&c| faces_of_cube(c)).collect();
    all.sort();
    all.dedup();
    for c in all {
        let k = c.1.len();
        let next = cells[k].len();
        cells[k].insert(c, next);
    }
    let dims: Vec<usize> = cells.iter().map(BTreeMap::len).collect();
    let mut ops = Vec::new();
    for k in 0..3 {
        // coboundary d_k: C^k -> C^{k+1} is the transpose of the boundary
        let mut m = Mat::zeros(dims[k + 1], dims[k]);
        for (cell, &row) in &cells[k + 1] {
            for (face, sign) in boundary(cell) {
                let col = cells[k][&face];
                m[(row, col)] += sign;
            }
        }
        ops.push(m);
    }
    FiniteComplex::unweighted(&dims, ops).expect("cubical complex shapes are consistent")
}

/// Lower corners of an `n x n x n` block of cubes.
pub fn solid_box_cubes(n: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// The `3 x 3 x 3` block with the central column along z removed: a solid torus.
pub fn solid_torus_cubes() -> Vec<[i64; 3]> {
    solid_box_cubes(3).into_iter().filter(|c| !(c[0] == 1 && c[1] == 1)).collect()
}

/// Named fixtures shipped as JSON under `fixtures/`.
pub fn named_fixtures() -> Vec<(&'static str, FiniteComplex)> {
    vec![
        ("path3", path_graph_complex(3)),
        ("path4", path_graph_complex(4)),
        ("solid_box", cubical_complex(&solid_box_cubes(3))),
        ("solid_torus", cubical_complex(&solid_torus_cubes())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts() {
        let c = cubical_complex(&solid_box_cubes(1));
        assert_eq!(c.dims(), vec![8, 12, 6, 1]);
        assert_eq!(c.max_composition_defect(), 0.0);
        let c = cubical_complex(&solid_box_cubes(3));
        assert_eq!(c.dims(), vec![64, 144, 108, 27]);
    }

    #[test]
    fn torus_has_a_hole() {
        let c = cubical_complex(&solid_torus_cubes());
        assert_eq!(c.max_composition_defect(), 0.0);
        let d = c.dims();
        // Euler characteristic of a solid torus is 0
        assert_eq!(d[0] as i64 - d[1] as i64 + d[2] as i64 - d[3] as i64, 0);
    }
}
