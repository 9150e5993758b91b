use std::fmt::Write as _;

use super::canon::canonical_ranks;
use super::{Atom, BondOrder, Molecule};

/// DFS spanning tree plus ring-closure edges, in canonical rank order.
struct Traversal {
    root: usize,
    children: Vec<Vec<(usize, usize)>>,
    /// Per atom: (other atom, bond) for every ring closure touching it, in
    /// the order the digits are written.
    closures: Vec<Vec<(usize, usize)>>,
}

fn traverse(mol: &Molecule, ranks: &[usize]) -> Traversal {
    let n = mol.atom_count();
    let root = (0..n).min_by_key(|&i| ranks[i]).unwrap_or(0);
    let mut visited = vec![false; n];
    let mut used = vec![false; mol.bonds().len()];
    let mut preorder = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    let mut closure_pairs = Vec::new();
    let mut counter = 0;

    fn visit(
        v: usize,
        mol: &Molecule,
        ranks: &[usize],
        st: &mut (
            &mut Vec<bool>,
            &mut Vec<bool>,
            &mut Vec<usize>,
            &mut Vec<Vec<(usize, usize)>>,
            &mut Vec<(usize, usize, usize)>,
            &mut usize,
        ),
    ) {
        st.0[v] = true;
        st.2[v] = *st.5;
        *st.5 += 1;
        let mut nbrs: Vec<(usize, usize)> = mol.neighbors(v).to_vec();
        nbrs.sort_by_key(|&(w, _)| ranks[w]);
        for (w, bi) in nbrs {
            if st.1[bi] {
                continue;
            }
            st.1[bi] = true;
            if st.0[w] {
                st.4.push((w, v, bi));
            } else {
                st.3[v].push((w, bi));
                visit(w, mol, ranks, st);
            }
        }
    }

    if n > 0 {
        let mut st = (
            &mut visited,
            &mut used,
            &mut preorder,
            &mut children,
            &mut closure_pairs,
            &mut counter,
        );
        visit(root, mol, ranks, &mut st);
    }

    let mut closures = vec![Vec::new(); n];
    for &(open, close, bi) in &closure_pairs {
        closures[open].push((close, bi));
        closures[close].push((open, bi));
    }
    for (v, list) in closures.iter_mut().enumerate() {
        // Closings (partner seen earlier) before openings, each by partner order.
        list.sort_by_key(|&(w, _)| (preorder[w] > preorder[v], preorder[w]));
    }
    Traversal {
        root,
        children,
        closures,
    }
}

fn emit(
    mol: &Molecule,
    t: &Traversal,
    atom_token: &dyn Fn(usize, &Atom) -> String,
    bond_token: &dyn Fn(usize) -> &'static str,
) -> String {
    let mut out = String::new();
    let mut digits: Vec<Option<usize>> = Vec::new(); // digit slot -> bond
    let mut stack: Vec<Frame> = vec![Frame::Atom(t.root, None)];

    enum Frame {
        Atom(usize, Option<usize>),
        Text(&'static str),
    }

    while let Some(frame) = stack.pop() {
        let (v, via) = match frame {
            Frame::Text(s) => {
                out.push_str(s);
                continue;
            }
            Frame::Atom(v, via) => (v, via),
        };
        if let Some(bi) = via {
            out.push_str(bond_token(bi));
        }
        out.push_str(&atom_token(v, &mol.atoms()[v]));
        for &(_, bi) in &t.closures[v] {
            let slot = digits.iter().position(|d| *d == Some(bi));
            let slot = match slot {
                Some(s) => {
                    digits[s] = None;
                    s
                }
                None => {
                    out.push_str(bond_token(bi));
                    let free = digits.iter().position(Option::is_none);
                    match free {
                        Some(s) => {
                            digits[s] = Some(bi);
                            s
                        }
                        None => {
                            digits.push(Some(bi));
                            digits.len() - 1
                        }
                    }
                }
            };
            let number = slot + 1;
            if number < 10 {
                write!(out, "{number}").unwrap();
            } else {
                write!(out, "%{number:02}").unwrap();
            }
        }
        let kids = &t.children[v];
        // Pushed in reverse so they pop in order; all but the last branch.
        for (k, &(w, bi)) in kids.iter().enumerate().rev() {
            let last = k + 1 == kids.len();
            if !last {
                stack.push(Frame::Text(")"));
            }
            stack.push(Frame::Atom(w, Some(bi)));
            if !last {
                stack.push(Frame::Text("("));
            }
        }
    }
    out
}

fn charge_suffix(out: &mut String, charge: i8) {
    match charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => write!(out, "+{c}").unwrap(),
        c => write!(out, "-{}", -c).unwrap(),
    }
}

/// Kekulé SMILES in canonical atom order. Brackets are used only for charged
/// atoms and atoms whose hydrogen count differs from the valence default.
pub(crate) fn write_smiles(mol: &Molecule) -> String {
    let ranks = canonical_ranks(mol);
    let t = traverse(mol, &ranks);
    let atom_token = |i: usize, a: &Atom| {
        let bond_sum: u8 = mol.neighbors(i).iter().map(|&(_, bi)| mol.bonds()[bi].kekule).sum();
        let default_h = a
            .element
            .default_valence(0, bond_sum)
            .map(|v| v - bond_sum);
        if a.charge == 0 && default_h == Some(a.hydrogens) {
            return a.element.symbol().to_string();
        }
        let mut s = format!("[{}", a.element.symbol());
        match a.hydrogens {
            0 => {}
            1 => s.push('H'),
            h => write!(s, "H{h}").unwrap(),
        }
        charge_suffix(&mut s, a.charge);
        s.push(']');
        s
    };
    let bond_token = |bi: usize| match mol.bonds()[bi].kekule {
        2 => "=",
        3 => "#",
        _ => "",
    };
    emit(mol, &t, &atom_token, &bond_token)
}

/// Canonical identifier: fully bracketed aromatic-form SMILES with every
/// bond symbol explicit, traversed in canonical rank order.
pub(crate) fn canonical_key(mol: &Molecule) -> String {
    let ranks = canonical_ranks(mol);
    let t = traverse(mol, &ranks);
    let atom_token = |_: usize, a: &Atom| {
        let mut s = String::from("[");
        if a.aromatic {
            s.push_str(&a.element.symbol().to_ascii_lowercase());
        } else {
            s.push_str(a.element.symbol());
        }
        if a.hydrogens > 0 {
            write!(s, "H{}", a.hydrogens).unwrap();
        }
        charge_suffix(&mut s, a.charge);
        s.push(']');
        s
    };
    let bond_token = |bi: usize| match mol.bonds()[bi].order {
        BondOrder::Single => "-",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => ":",
    };
    emit(mol, &t, &atom_token, &bond_token)
}
