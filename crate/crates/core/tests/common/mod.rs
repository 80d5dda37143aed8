//! Independent nodal-analysis oracle for crossbar columns, shared by the
//! integration and acceptance tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sotneuron::crossbar::{ConductanceLayer, CrossbarParams};

/// Gaussian elimination with partial pivoting on a dense system.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Current through the sense conductance, by KCL on every node. Each cell
/// hangs between its source and the column node; with a switch resistance
/// the cell gets its own intermediate node.
pub fn nodal_current(g_plus: &[f64], g_minus: &[f64], x: &[u8], p: &CrossbarParams) -> f64 {
    let rows = x.len();
    let mut cells = vec![];
    for i in 0..rows {
        let v = if x[i] == 1 { p.vs } else { 0.0 };
        cells.push((g_plus[i], v));
        cells.push((g_minus[i], -v));
    }
    let n_int = if p.r_switch > 0.0 { cells.len() } else { 0 };
    let n = 1 + n_int;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    a[0][0] += p.gs;
    for (k, &(g, v)) in cells.iter().enumerate() {
        if p.r_switch > 0.0 {
            // source -- switch -- node k+1 -- cell -- column node 0
            let gsw = 1.0 / p.r_switch;
            let m = k + 1;
            a[m][m] += gsw + g;
            b[m] += gsw * v;
            a[m][0] -= g;
            a[0][m] -= g;
            a[0][0] += g;
        } else {
            a[0][0] += g;
            b[0] += g * v;
        }
    }
    p.gs * solve(a, b)[0]
}

pub fn random_column(rng: &mut ChaCha8Rng, p: &CrossbarParams, rows: usize) -> (ConductanceLayer, Vec<u8>) {
    let codes: Vec<i16> = (0..rows).map(|_| rng.random_range(-(p.levels as i16)..=p.levels as i16)).collect();
    let (g_plus, g_minus): (Vec<f64>, Vec<f64>) = codes.iter().map(|&c| p.cells(c)).unzip();
    let mut x: Vec<u8> = (0..rows).map(|_| rng.random_range(0..2)).collect();
    x[rows - 1] = 1;
    (
        ConductanceLayer {
            rows,
            cols: 1,
            scale: 1.0,
            codes,
            g_plus,
            g_minus,
        },
        x,
    )
}
