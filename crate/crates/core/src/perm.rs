//! Permutations on `{0, ..., degree-1}`, composed left to right.
//!
//! `a.mul(&b)` applies `a` first, so `i^(ab) = (i^a)^b`; conjugation is
//! `x^g = g⁻¹ x g`. Ordering is lexicographic on the image arrays, which puts
//! the identity first.

use std::fmt;

use crate::error::GroupError;

/// Points are stored as `u8`, so degrees are capped here.
pub const MAX_DEGREE: usize = 255;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Box<[u8]>,
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE);
        Perm {
            images: (0..degree as u8).collect(),
        }
    }

    pub fn from_images(images: &[usize]) -> Result<Self, GroupError> {
        let degree = images.len();
        if degree > MAX_DEGREE {
            return Err(GroupError::DegreeTooLarge {
                degree,
                max: MAX_DEGREE,
            });
        }
        let mut seen = vec![false; degree];
        for &i in images {
            if i >= degree || seen[i] {
                return Err(GroupError::NotABijection { degree });
            }
            seen[i] = true;
        }
        Ok(Perm {
            images: images.iter().map(|&i| i as u8).collect(),
        })
    }

    /// Parses 1-based cycle notation such as `(1 2)(3 4)`; `()` or an empty
    /// string is the identity.
    pub fn from_cycles(degree: usize, text: &str) -> Result<Self, GroupError> {
        if degree > MAX_DEGREE {
            return Err(GroupError::DegreeTooLarge {
                degree,
                max: MAX_DEGREE,
            });
        }
        let err = |reason: &str| GroupError::CycleSyntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut images: Vec<usize> = (0..degree).collect();
        let mut rest = text.trim();
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(err("expected '('"));
            }
            let close = rest.find(')').ok_or_else(|| err("unclosed cycle"))?;
            let body = &rest[1..close];
            let points = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| err(&format!("bad point {t:?}")))
                        .and_then(|p| {
                            if p == 0 || p > degree {
                                Err(err(&format!("point {p} outside 1..={degree}")))
                            } else {
                                Ok(p - 1)
                            }
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            // Cycles compose left to right as well.
            let mut cycle = vec![None; degree];
            for (k, &p) in points.iter().enumerate() {
                if cycle[p].is_some() {
                    return Err(err(&format!("point {} repeated in a cycle", p + 1)));
                }
                cycle[p] = Some(points[(k + 1) % points.len()]);
            }
            for img in images.iter_mut() {
                if let Some(next) = cycle[*img] {
                    *img = next;
                }
            }
            rest = rest[close + 1..].trim_start();
        }
        Perm::from_images(&images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&i| i as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    /// `self` followed by `other`.
    pub fn mul(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: self.images.iter().map(|&i| other.images[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        Perm {
            images: inv.into_boxed_slice(),
        }
    }

    /// `g⁻¹ self g`.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        g.inverse().mul(self).mul(g)
    }

    pub fn order(&self) -> usize {
        let mut seen = vec![false; self.degree()];
        let mut order = 1usize;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i] as usize;
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }

    /// 1-based disjoint-cycle notation; the identity prints as `()`.
    pub fn to_cycles(&self) -> String {
        let mut out = String::new();
        let mut seen = vec![false; self.degree()];
        for start in 0..self.degree() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            out.push('(');
            let mut i = start;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push_str(&(i + 1).to_string());
                i = self.images[i] as usize;
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycles())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycles())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycles_round_trip() {
        let p = Perm::from_cycles(5, "(1 2 3)(4 5)").unwrap();
        assert_eq!(p.to_cycles(), "(1 2 3)(4 5)");
        assert_eq!(p.order(), 6);
        assert_eq!(Perm::from_cycles(4, "()").unwrap(), Perm::identity(4));
        assert_eq!(Perm::from_cycles(4, "").unwrap(), Perm::identity(4));
    }

    #[test]
    fn composition_is_left_to_right() {
        let a = Perm::from_cycles(3, "(1 2)").unwrap();
        let b = Perm::from_cycles(3, "(2 3)").unwrap();
        // 1 -a-> 2 -b-> 3
        assert_eq!(a.mul(&b).image(0), 2);
        assert_eq!(a.mul(&b).to_cycles(), "(1 3 2)");
        assert!(a.mul(&a.inverse()).is_identity());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Perm::from_cycles(3, "(1 4)").is_err());
        assert!(Perm::from_cycles(3, "(1 1)").is_err());
        assert!(Perm::from_cycles(3, "(1 2").is_err());
        assert!(Perm::from_images(&[0, 0, 1]).is_err());
    }

    #[test]
    fn identity_is_lexicographically_least() {
        let id = Perm::identity(4);
        let t = Perm::from_cycles(4, "(3 4)").unwrap();
        assert!(id < t);
    }
}
