use rayon::prelude::*;

use crate::mesh::Mesh;
use crate::mortar::InterfacePair;

/// Candidate master elements for every slave element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactCandidates {
    /// `candidates[s]` lists master elements (ascending) near slave element `s`.
    pub candidates: Vec<Vec<usize>>,
    /// Slave elements without any candidate.
    pub uncovered: Vec<usize>,
}

impl ContactCandidates {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.candidates.iter().enumerate().map(|(s, m)| (s, m.as_slice()))
    }

    pub fn n_pairs(&self) -> usize {
        self.candidates.iter().map(Vec::len).sum()
    }
}

type Aabb = ([f64; 3], [f64; 3]);

fn boxes(mesh: &Mesh, pad: f64) -> Vec<Aabb> {
    (0..mesh.n_elements())
        .map(|e| {
            let (mut lo, mut hi) = mesh.geometry(e).bounding_box();
            for d in 0..3 {
                lo[d] -= pad;
                hi[d] += pad;
            }
            (lo, hi)
        })
        .collect()
}

fn overlap(a: &Aabb, b: &Aabb) -> bool {
    (0..3).all(|d| a.0[d] <= b.1[d] && b.0[d] <= a.1[d])
}

/// Bounding-box contact search; both boxes are inflated by the pair's gap tolerance.
///
/// Quadratic-element boxes are built from the nodes, which bound the element for
/// the mildly curved geometries handled here.
pub fn contact_search(pair: &InterfacePair) -> ContactCandidates {
    let pad = 0.5 * pair.gap_tolerance;
    let mb = boxes(&pair.master, pad);
    let sb = boxes(&pair.slave, pad);
    let candidates: Vec<Vec<usize>> = sb
        .par_iter()
        .map(|s| (0..mb.len()).filter(|&m| overlap(s, &mb[m])).collect())
        .collect();
    let uncovered = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_empty())
        .map(|(s, _)| s)
        .collect();
    ContactCandidates { candidates, uncovered }
}
