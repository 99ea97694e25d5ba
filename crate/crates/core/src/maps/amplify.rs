use super::{MapDescriptor, MapError};
use crate::algebra::{block_entries, block_matrix, Element};

fn split_args(map: &MapDescriptor, n: usize, args: &[Element]) -> Result<Vec<Vec<Vec<Element>>>, MapError> {
    if n == 0 {
        return Err(MapError::InvalidNotion("amplification order must be at least 1".into()));
    }
    if args.len() != map.arity() {
        return Err(MapError::Arity { expected: map.arity(), found: args.len() });
    }
    args.iter()
        .zip(map.domain_shapes())
        .enumerate()
        .map(|(slot, (a, s))| {
            let expected = s.amplified(n);
            if a.shape() != &expected {
                return Err(MapError::ArgumentShape { slot, expected, found: a.shape().clone() });
            }
            Ok(block_entries(a, n)?)
        })
        .collect()
}

/// Entrywise amplification: output block (i,j) is `Φ(A¹_ij, …, A^k_ij)`.
pub fn amplify_type2(map: &MapDescriptor, n: usize, args: &[Element]) -> Result<Element, MapError> {
    let parts = split_args(map, n, args)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let entry: Vec<Element> = parts.iter().map(|p| p[i][j].clone()).collect();
            row.push(map.evaluate(&entry)?);
        }
        out.push(row);
    }
    Ok(block_matrix(&out)?)
}

/// Contracted amplification: output block (i,j) is
/// `Σ_{l_1..l_{k-1}} Φ(A¹_{i l_1}, A²_{l_1 l_2}, …, A^k_{l_{k-1} j})`.
/// Requires all slots to share one shape.
pub fn amplify_type1(map: &MapDescriptor, n: usize, args: &[Element]) -> Result<Element, MapError> {
    if !map.has_homogeneous_domains() {
        return Err(MapError::HeterogeneousDomains);
    }
    let parts = split_args(map, n, args)?;
    let k = map.arity();
    let inner = k - 1;
    let combos = n.pow(inner as u32);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Element::zeros(map.codomain_shape());
            let mut idx = vec![0usize; inner];
            for _ in 0..combos {
                let entry: Vec<Element> = (0..k)
                    .map(|s| {
                        let r = if s == 0 { i } else { idx[s - 1] };
                        let c = if s == k - 1 { j } else { idx[s] };
                        parts[s][r][c].clone()
                    })
                    .collect();
                acc = &acc + &map.evaluate(&entry)?;
                for slot in idx.iter_mut().rev() {
                    *slot += 1;
                    if *slot < n {
                        break;
                    }
                    *slot = 0;
                }
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(block_matrix(&out)?)
}
