//! Depth-first enumeration of `<`-increasing tuples drawn from a list.
//!
//! Tuples are produced in lexicographic order of item positions. Every search
//! in the crate that quantifies over block subsequences of a finite span, or
//! over `⟨B⟩^{(d)}`, goes through here so they all share one canonical order.

use std::ops::ControlFlow;

use crate::fin::FinFn;

/// Walks all increasing `d`-tuples of `items`, as position lists.
///
/// `descend` sees every nonempty proper-or-full prefix before it is extended;
/// returning `false` prunes that subtree (the prefix itself is not reported as
/// a leaf). `leaf` sees each complete tuple and may stop the walk.
pub fn walk<D, L, B>(items: &[FinFn], d: usize, mut descend: D, mut leaf: L) -> Option<B>
where
    D: FnMut(&[usize]) -> bool,
    L: FnMut(&[usize]) -> ControlFlow<B>,
{
    walk_from(items, d, &[], &mut descend, &mut leaf)
}

/// As [`walk`], restricted to tuples extending `prefix`.
pub fn walk_from<D, L, B>(
    items: &[FinFn],
    d: usize,
    prefix: &[usize],
    descend: &mut D,
    leaf: &mut L,
) -> Option<B>
where
    D: FnMut(&[usize]) -> bool,
    L: FnMut(&[usize]) -> ControlFlow<B>,
{
    let mut stack = prefix.to_vec();
    match rec(items, d, &mut stack, descend, leaf) {
        ControlFlow::Break(b) => Some(b),
        ControlFlow::Continue(()) => None,
    }
}

fn rec<D, L, B>(
    items: &[FinFn],
    d: usize,
    stack: &mut Vec<usize>,
    descend: &mut D,
    leaf: &mut L,
) -> ControlFlow<B>
where
    D: FnMut(&[usize]) -> bool,
    L: FnMut(&[usize]) -> ControlFlow<B>,
{
    if stack.len() == d {
        return leaf(stack);
    }
    let last = stack.last().map(|&i| &items[i]);
    for (pos, item) in items.iter().enumerate() {
        if let Some(prev) = last {
            if !prev.precedes(item) {
                continue;
            }
        } else if item.is_null() {
            continue;
        }
        stack.push(pos);
        let go = stack.len() == d || descend(stack);
        if go {
            rec(items, d, stack, descend, leaf)?;
        }
        stack.pop();
    }
    ControlFlow::Continue(())
}

/// Every increasing `d`-tuple, as position lists.
pub fn all(items: &[FinFn], d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    walk::<_, _, ()>(items, d, |_| true, |t| {
        out.push(t.to_vec());
        ControlFlow::Continue(())
    });
    out
}
