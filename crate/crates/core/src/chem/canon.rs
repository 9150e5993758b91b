use super::Molecule;

/// Dense ranks (0..k) of `keys`, equal keys sharing a rank.
fn dense_rank<K: Ord>(keys: &[K]) -> (Vec<usize>, usize) {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut classes = 0;
    for (pos, &i) in idx.iter().enumerate() {
        if pos > 0 && keys[i] != keys[idx[pos - 1]] {
            classes += 1;
        }
        ranks[i] = classes;
    }
    (ranks, if keys.is_empty() { 0 } else { classes + 1 })
}

/// Split rank classes by sorted neighbor (bond, rank) lists until stable.
fn refine(mol: &Molecule, ranks: &mut Vec<usize>, mut classes: usize) -> usize {
    loop {
        let keys: Vec<(usize, Vec<(u8, usize)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut env: Vec<(u8, usize)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, bi)| (mol.bonds()[bi].order.code(), ranks[j]))
                    .collect();
                env.sort_unstable();
                (ranks[i], env)
            })
            .collect();
        let (next, next_classes) = dense_rank(&keys);
        *ranks = next;
        if next_classes == classes {
            return classes;
        }
        classes = next_classes;
    }
}

/// Canonical atom ranking: iterative neighborhood refinement from atom
/// invariants, with symmetric ties broken one atom at a time.
///
/// The ranking depends only on the graph, never on input atom order, as long
/// as refinement-equivalent atoms are also symmetry-equivalent (true for
/// ordinary molecular graphs).
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let n = mol.atom_count();
    let invariants: Vec<_> = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.element.atomic_number(),
                a.charge,
                a.hydrogens,
                mol.heavy_degree(i),
                a.aromatic,
                a.in_ring,
            )
        })
        .collect();
    let (mut ranks, classes) = dense_rank(&invariants);
    let mut classes = refine(mol, &mut ranks, classes);
    while classes < n {
        let mut counts = vec![0usize; classes];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..classes).find(|&r| counts[r] > 1).unwrap();
        let chosen = (0..n).find(|&i| ranks[i] == tied).unwrap();
        for (i, r) in ranks.iter_mut().enumerate() {
            *r = 2 * *r + usize::from(i != chosen);
        }
        let (dense, c) = dense_rank(&ranks);
        ranks = dense;
        classes = refine(mol, &mut ranks, c);
    }
    ranks
}
