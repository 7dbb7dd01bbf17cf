//! Closed-form triple coefficients of the trigonometric system with
//! constant weights, for index triples whose inner or outer pair coincides.

use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Printing {
    Corrected,
    AsPrinted,
}

/// Closed form of `C_{j3 j2 j1}` on an interval of width `w`, or `None`
/// when neither `j2 = j1` nor `j3 = j2`.
pub fn trig_coeff_closed<T: Scalar>(j3: usize, j2: usize, j1: usize, width: T) -> Option<T> {
    closed(j3, j2, j1, width, Printing::Corrected)
}

/// Same table, but with `C_{2l-1,2l-1,2r}` carrying the signs of its
/// commonly reproduced printing (`-√2/(16π²l²)` at `r = 2l`, `+√2/(4π²l²)`
/// at `r = l`). Those signs contradict the reflection symmetry
/// `C_{a b c} = ±C_{c b a}` and the aggregated sum over the family; kept
/// only so tests can demonstrate the discrepancy.
pub fn trig_coeff_closed_as_printed<T: Scalar>(j3: usize, j2: usize, j1: usize, width: T) -> Option<T> {
    closed(j3, j2, j1, width, Printing::AsPrinted)
}

/// Decodes a trig index into `(harmonic r, is_sine)`; index 0 is `(0, false)`.
#[inline]
fn split(j: usize) -> (usize, bool) {
    (j.div_ceil(2), j % 2 == 1)
}

fn closed<T: Scalar>(j3: usize, j2: usize, j1: usize, width: T, printing: Printing) -> Option<T> {
    let scale = width.powf(T::lit(1.5));
    let pi = T::PI();
    let sqrt2 = T::SQRT_2();
    let f = |x: usize| T::of(x);
    let value = if j2 == j1 {
        let (l, l_sine) = split(j1);
        let (r, r_sine) = split(j3);
        match (j1, j3) {
            (0, 0) => T::one() / T::lit(6.0),
            (0, _) if r_sine => -sqrt2 / (T::lit(4.0) * pi * f(r)),
            (0, _) => sqrt2 / (T::lit(4.0) * pi * pi * f(r * r)),
            (_, 0) if l_sine => T::lit(3.0) / (T::lit(8.0) * pi * pi * f(l * l)),
            (_, 0) => T::one() / (T::lit(8.0) * pi * pi * f(l * l)),
            _ if r_sine => T::zero(),
            _ if !l_sine => {
                if r == 2 * l {
                    -sqrt2 / (T::lit(16.0) * pi * pi * f(l * l))
                } else {
                    T::zero()
                }
            }
            _ => {
                if r == 2 * l {
                    sqrt2 / (T::lit(16.0) * pi * pi * f(l * l))
                } else if r == l {
                    -sqrt2 / (T::lit(4.0) * pi * pi * f(l * l))
                } else {
                    T::zero()
                }
            }
        }
    } else if j3 == j2 {
        let (l, l_sine) = split(j3);
        let (r, r_sine) = split(j1);
        match (j3, j1) {
            (0, _) if r_sine => sqrt2 / (T::lit(4.0) * pi * f(r)),
            (0, _) => sqrt2 / (T::lit(4.0) * pi * pi * f(r * r)),
            (_, 0) if l_sine => T::lit(3.0) / (T::lit(8.0) * pi * pi * f(l * l)),
            (_, 0) => T::one() / (T::lit(8.0) * pi * pi * f(l * l)),
            _ if r_sine => T::zero(),
            _ if !l_sine => {
                if r == 2 * l {
                    -sqrt2 / (T::lit(16.0) * pi * pi * f(l * l))
                } else {
                    T::zero()
                }
            }
            _ => {
                let sign = match printing {
                    Printing::Corrected => T::one(),
                    Printing::AsPrinted => -T::one(),
                };
                if r == 2 * l {
                    sign * sqrt2 / (T::lit(16.0) * pi * pi * f(l * l))
                } else if r == l {
                    -sign * sqrt2 / (T::lit(4.0) * pi * pi * f(l * l))
                } else {
                    T::zero()
                }
            }
        }
    } else {
        return None;
    };
    Some(value * scale)
}
