use std::f64::consts::PI;

/// Trig factors of the tilted two-point equation at one lattice point:
/// `s₁ = sin(x̃₁+ỹ₂)`, `s₂ = sin(x̃₂+ỹ₁)`, `s₃ = sin x̃₃`, `s₄ = sin x̃₄` and cosines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trig {
    pub s1: f64,
    pub c1: f64,
    pub s2: f64,
    pub c2: f64,
    pub s3: f64,
    pub c3: f64,
    pub s4: f64,
    pub c4: f64,
}

impl Trig {
    pub fn at(x: &[f64; 6]) -> Self {
        let (s1, c1) = (x[0] + x[5]).sin_cos();
        let (s2, c2) = (x[1] + x[4]).sin_cos();
        let (s3, c3) = x[2].sin_cos();
        let (s4, c4) = x[3].sin_cos();
        Self { s1, c1, s2, c2, s3, c3, s4, c4 }
    }

    /// Distance-to-degeneracy weight `d̃ = √(s₃² + s₄²)`.
    pub fn weight(&self) -> f64 {
        (self.s3 * self.s3 + self.s4 * self.s4).sqrt()
    }
}

/// Lattice tables of `sin(2πi/n)` and `cos(2πi/n)` for `0 ≤ i < 2n`.
///
/// Because `x̃₁ + ỹ₂` on the lattice is again a lattice angle, every factor at
/// every point is a lookup; nothing of size `n⁶` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigTables {
    n: usize,
    sin: Vec<f64>,
    cos: Vec<f64>,
}

impl TrigTables {
    pub fn new(n: usize) -> Self {
        let (sin, cos) = (0..2 * n)
            .map(|i| (2.0 * PI * i as f64 / n as f64).sin_cos())
            .unzip();
        Self { n, sin, cos }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Factors at lattice index `ix`.
    #[inline]
    pub fn at(&self, ix: &[usize; 6]) -> Trig {
        let a = ix[0] + ix[5];
        let b = ix[1] + ix[4];
        Trig {
            s1: self.sin[a],
            c1: self.cos[a],
            s2: self.sin[b],
            c2: self.cos[b],
            s3: self.sin[ix[2]],
            c3: self.cos[ix[2]],
            s4: self.sin[ix[3]],
            c4: self.cos[ix[3]],
        }
    }

    /// Visit every row of `n` consecutive lattice points (fixed `x̃, ỹ₁`,
    /// varying `ỹ₂`) with the offset of its first point.
    pub fn for_each_row(&self, mut f: impl FnMut(usize, &[Trig])) {
        let n = self.n;
        let mut row = vec![Trig::at(&[0.0; 6]); n];
        let mut start = 0;
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        for i4 in 0..n {
                            for (i5, t) in row.iter_mut().enumerate() {
                                *t = self.at(&[i0, i1, i2, i3, i4, i5]);
                            }
                            f(start, &row);
                            start += n;
                        }
                    }
                }
            }
        }
    }

    /// Visit every lattice point in storage order.
    pub fn for_each(&self, mut f: impl FnMut(usize, &Trig)) {
        self.for_each_row(|start, row| {
            for (k, t) in row.iter().enumerate() {
                f(start + k, t);
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::unravel6;

    #[test]
    fn pythagoras_and_weight_range() {
        let t = TrigTables::new(12);
        t.for_each(|_, p| {
            for (s, c) in [(p.s1, p.c1), (p.s2, p.c2), (p.s3, p.c3), (p.s4, p.c4)] {
                assert!((s * s + c * c - 1.0).abs() <= 1e-15);
            }
            let w = p.weight();
            assert!((0.0..=2f64.sqrt() + 1e-15).contains(&w));
        });
    }

    #[test]
    fn lookup_matches_direct_evaluation() {
        let n = 8;
        let t = TrigTables::new(n);
        t.for_each(|idx, p| {
            let ix = unravel6(idx, n);
            let x = ix.map(|i| 2.0 * PI * i as f64 / n as f64);
            let q = Trig::at(&x);
            assert!((p.s1 - q.s1).abs() < 1e-14 && (p.c2 - q.c2).abs() < 1e-14);
        });
    }
}
