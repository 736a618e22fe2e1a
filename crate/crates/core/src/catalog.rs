//! Permutation generators for the groups used throughout the test battery.

use crate::group::PermGroup;
use crate::perm::Perm;

fn build(degree: usize, gens: &[&str]) -> PermGroup {
    let gens = gens
        .iter()
        .map(|g| Perm::from_cycles(degree, g).expect("catalog generator"))
        .collect();
    PermGroup::generate_bounded(degree, gens, usize::MAX).expect("catalog group")
}

/// Action of invertible matrices over `F_q` (q prime) on the nonzero row
/// vectors, by right multiplication.
fn matrix_group(q: usize, dim: usize, mats: &[Vec<Vec<usize>>], projective: bool) -> PermGroup {
    let mut vectors: Vec<Vec<usize>> = Vec::new();
    let total = q.pow(dim as u32);
    for code in 1..total {
        let mut v = Vec::with_capacity(dim);
        let mut c = code;
        for _ in 0..dim {
            v.push(c % q);
            c /= q;
        }
        if projective {
            // Keep the representative whose first nonzero entry is 1.
            if v.iter().find(|&&x| x != 0) != Some(&1) {
                continue;
            }
        }
        vectors.push(v);
    }
    let normalize = |mut v: Vec<usize>| {
        if projective {
            let lead = *v.iter().find(|&&x| x != 0).unwrap();
            let inv = (1..q).find(|&i| i * lead % q == 1).unwrap();
            for x in v.iter_mut() {
                *x = *x * inv % q;
            }
        }
        v
    };
    let gens = mats
        .iter()
        .map(|m| {
            let images: Vec<usize> = vectors
                .iter()
                .map(|v| {
                    let w: Vec<usize> = (0..dim)
                        .map(|j| (0..dim).map(|i| v[i] * m[i][j]).sum::<usize>() % q)
                        .collect();
                    let w = normalize(w);
                    vectors.iter().position(|u| *u == w).unwrap()
                })
                .collect();
            Perm::from_images(&images).expect("matrix action")
        })
        .collect();
    PermGroup::generate_bounded(vectors.len(), gens, usize::MAX).expect("matrix group")
}

pub fn cyclic(n: usize) -> PermGroup {
    let cycle: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    build(n, &[&format!("({})", cycle.join(" "))])
}

pub fn symmetric(n: usize) -> PermGroup {
    let cycle: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    build(n, &["(1 2)", &format!("({})", cycle.join(" "))])
}

pub fn alternating(n: usize) -> PermGroup {
    let gens: Vec<String> = (3..=n).map(|k| format!("(1 2 {k})")).collect();
    let refs: Vec<&str> = gens.iter().map(String::as_str).collect();
    build(n, &refs)
}

pub fn dihedral8() -> PermGroup {
    build(4, &["(1 2 3 4)", "(1 3)"])
}

pub fn quaternion8() -> PermGroup {
    build(8, &["(1 2 3 4)(5 6 7 8)", "(1 5 3 7)(2 8 4 6)"])
}

pub fn symmetric3() -> PermGroup {
    symmetric(3)
}

/// SL(2,3) acting on the eight nonzero vectors of `F_3^2`.
pub fn sl23() -> PermGroup {
    matrix_group(
        3,
        2,
        &[vec![vec![1, 1], vec![0, 1]], vec![vec![0, 2], vec![1, 0]]],
        false,
    )
}

/// PSL(2,7) ≅ GL(3,2) acting on the seven points of the Fano plane.
pub fn psl27() -> PermGroup {
    matrix_group(
        2,
        3,
        &[
            vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]],
            vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]],
            vec![vec![1, 0, 0], vec![0, 1, 1], vec![0, 0, 1]],
        ],
        true,
    )
}

pub fn c2_x_s3() -> PermGroup {
    build(5, &["(1 2 3)", "(1 2)", "(4 5)"])
}

/// Generators in cycle notation, keyed by the names the CLI accepts.
pub fn named(name: &str) -> Option<(usize, Vec<&'static str>)> {
    let g: (usize, Vec<&'static str>) = match name.to_ascii_lowercase().as_str() {
        "s3" => (3, vec!["(1 2)", "(1 2 3)"]),
        "s4" => (4, vec!["(1 2)", "(1 2 3 4)"]),
        "a4" => (4, vec!["(1 2 3)", "(1 2)(3 4)"]),
        "d8" => (4, vec!["(1 2 3 4)", "(1 3)"]),
        "q8" => (8, vec!["(1 2 3 4)(5 6 7 8)", "(1 5 3 7)(2 8 4 6)"]),
        "c2xs3" => (5, vec!["(1 2 3)", "(1 2)", "(4 5)"]),
        _ => return None,
    };
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(symmetric(4).order(), 24);
        assert_eq!(alternating(4).order(), 12);
        assert_eq!(alternating(5).order(), 60);
        assert_eq!(dihedral8().order(), 8);
        assert_eq!(quaternion8().order(), 8);
        assert_eq!(sl23().order(), 24);
        assert_eq!(psl27().order(), 168);
        assert_eq!(c2_x_s3().order(), 12);
        assert_eq!(cyclic(5).order(), 5);
    }

    #[test]
    fn sl23_is_not_s4() {
        // SL(2,3) has a unique involution; S4 has nine.
        let g = sl23();
        let invol = (0..g.order()).filter(|&x| g.element_order(x) == 2).count();
        assert_eq!(invol, 1);
    }

    #[test]
    fn psl27_is_simple() {
        assert_eq!(psl27().normal_subgroups().unwrap().len(), 2);
    }
}
