// SPDX-License-Identifier: Apache-2.0

//! Arithmetic generators over primitive gates. Buses are LSB first.
//!
//! Full adder mapping: `t = a^b; s = t^cin; cout = (a&b) | (t&cin)`, i.e. two
//! XOR2, two AND2 and one OR2 per bit. Ripple-carry adders never special-case a
//! constant carry-in, so a k-bit adder is always exactly k full adders.

use alloc::vec::Vec;

use crate::netlist::{ComponentKind, NetId, Scope};

pub type Bus = Vec<NetId>;

pub fn full_adder(s: &mut Scope<'_>, a: NetId, b: NetId, cin: NetId) -> (NetId, NetId) {
    let t = s.xor2(a, b);
    let sum = s.xor2(t, cin);
    let g = s.and2(a, b);
    let p = s.and2(t, cin);
    (sum, s.or2(g, p))
}

/// `a + b + cin` over equal-width buses; returns the sum bits and carry out.
pub fn ripple_add(s: &mut Scope<'_>, a: &[NetId], b: &[NetId], cin: NetId) -> (Bus, NetId) {
    assert_eq!(a.len(), b.len(), "ripple_add operands differ in width");
    let mut carry = cin;
    let mut sum = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let (bit, c) = full_adder(s, x, y, carry);
        sum.push(bit);
        carry = c;
    }
    (sum, carry)
}

/// Sign- or zero-extends (or truncates) `bus` to `width` bits. Extension reuses
/// the MSB net and costs no gates.
pub fn extend(bus: &[NetId], width: usize, signed: bool) -> Bus {
    let fill = match (signed, bus.last()) {
        (true, Some(&msb)) => msb,
        _ => NetId::ZERO,
    };
    (0..width).map(|i| bus.get(i).copied().unwrap_or(fill)).collect()
}

/// Unsigned `x` times two's-complement `w`; the product is `x.len() + w.len()`
/// bits wide, which always holds the exact result.
///
/// Row `j` is the partial product `x_j & w`, sign-extended and added into bits
/// `j..` of the running sum by a ripple-carry adder of width `P - j`.
pub fn array_multiply(s: &mut Scope<'_>, x: &[NetId], w: &[NetId]) -> Bus {
    let width = x.len() + w.len();
    s.component(ComponentKind::Multiplier, width as u32);
    let mut acc = extend(&and_row(s, x[0], w), width, true);
    for (j, &xj) in x.iter().enumerate().skip(1) {
        let pp = extend(&and_row(s, xj, w), width - j, true);
        let (sum, _) = ripple_add(s, &acc[j..], &pp, NetId::ZERO);
        acc.splice(j.., sum);
    }
    acc
}

fn and_row(s: &mut Scope<'_>, xj: NetId, w: &[NetId]) -> Bus {
    w.iter().map(|&wk| s.and2(xj, wk)).collect()
}

/// Balanced tree of ripple-carry adders summing same-width operands modulo
/// `2^width`. Callers size `width` so that no partial sum overflows.
pub fn adder_tree(s: &mut Scope<'_>, mut operands: Vec<Bus>) -> Bus {
    assert!(!operands.is_empty(), "adder tree needs an operand");
    while operands.len() > 1 {
        let mut next = Vec::with_capacity(operands.len().div_ceil(2));
        let mut it = operands.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => {
                    s.component(ComponentKind::Adder, a.len() as u32);
                    next.push(ripple_add(s, &a, &b, NetId::ZERO).0);
                }
                None => next.push(a),
            }
        }
        operands = next;
    }
    operands.pop().unwrap()
}

/// `a > b` for equal-width operands, as the sign of `b - a` computed on one
/// extra bit with a carry-only subtractor chain.
pub fn greater_than(s: &mut Scope<'_>, a: &[NetId], b: &[NetId], signed: bool) -> NetId {
    assert_eq!(a.len(), b.len(), "comparator operands differ in width");
    s.component(ComponentKind::Comparator, a.len() as u32);
    let na: Bus = a.iter().map(|&x| s.not(x)).collect();
    let (b_top, na_top) = if signed { (*b.last().unwrap(), *na.last().unwrap()) } else { (NetId::ZERO, NetId::ONE) };
    let mut carry = NetId::ONE;
    for (&bi, &ni) in b.iter().zip(&na) {
        let t = s.xor2(bi, ni);
        let g = s.and2(bi, ni);
        let p = s.and2(t, carry);
        carry = s.or2(g, p);
    }
    let t = s.xor2(b_top, na_top);
    s.xor2(t, carry)
}

/// `bus == value`, as an AND chain over per-bit literals.
pub fn equals_const(s: &mut Scope<'_>, bus: &[NetId], value: u64) -> NetId {
    let mut lits = bus
        .iter()
        .enumerate()
        .map(|(i, &b)| if (value >> i) & 1 == 1 { b } else { s.not(b) })
        .collect::<Vec<_>>()
        .into_iter();
    let first = lits.next().unwrap_or(NetId::ONE);
    lits.fold(first, |acc, l| s.and2(acc, l))
}

/// `bus + inc` with half adders, wrapping at the bus width.
pub fn increment(s: &mut Scope<'_>, bus: &[NetId], inc: NetId) -> Bus {
    let mut carry = inc;
    let mut out = Vec::with_capacity(bus.len());
    for (i, &b) in bus.iter().enumerate() {
        out.push(s.xor2(b, carry));
        if i + 1 < bus.len() {
            carry = s.and2(b, carry);
        }
    }
    out
}

/// Constant bus holding the low `width` bits of `value`.
pub fn const_bus(value: i64, width: usize) -> Bus {
    (0..width).map(|i| if (value >> i.min(63)) & 1 == 1 { NetId::ONE } else { NetId::ZERO }).collect()
}
