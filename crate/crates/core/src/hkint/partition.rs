use crate::funcspec::{interval::cmp_points, FuncExpr, Interval};
use crate::numeric::NeumaierSum;

use super::{Gauge, HkError};

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedCell {
    pub cell: Interval,
    pub tag: Vec<f64>,
}

/// Non-overlapping closed cells covering a parent box, each with a tag inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPartition {
    parent: Interval,
    cells: Vec<TaggedCell>,
}

impl TaggedPartition {
    /// Validate and build. Non-overlap is checked exactly on endpoints; coverage
    /// by total volume within `1e-12` relative.
    pub fn new(parent: Interval, cells: Vec<TaggedCell>) -> Result<Self, HkError> {
        let bad = |m: String| Err(HkError::Partition(m));
        if cells.is_empty() {
            return bad("no cells".into());
        }
        for (i, c) in cells.iter().enumerate() {
            if c.cell.dim() != parent.dim() {
                return bad(format!("cell {i} has the wrong dimension"));
            }
            if !c.cell.contains(&c.tag) {
                return bad(format!("tag of cell {i} lies outside its cell"));
            }
            if !parent.contains_box(&c.cell) {
                return bad(format!("cell {i} sticks out of the parent box"));
            }
        }
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| cells[a].cell.lower()[0].total_cmp(&cells[b].cell.lower()[0]));
        for (k, &i) in order.iter().enumerate() {
            let a = &cells[i].cell;
            for &j in &order[k + 1..] {
                let b = &cells[j].cell;
                if b.lower()[0] >= a.upper()[0] {
                    break;
                }
                if a.overlaps_interior(b) {
                    return bad(format!("cells {i} and {j} overlap"));
                }
            }
        }
        let total: f64 = cells.iter().map(|c| c.cell.volume()).sum();
        let vol = parent.volume();
        if (total - vol).abs() > 1e-12 * vol.max(f64::MIN_POSITIVE) {
            return bad(format!("cells cover volume {total}, parent has {vol}"));
        }
        Ok(Self { parent, cells })
    }

    pub fn parent(&self) -> &Interval {
        &self.parent
    }

    pub fn cells(&self) -> &[TaggedCell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Every cell lies in the closed max-norm ball of radius `δ(tag)` about its tag.
pub fn is_delta_fine(partition: &TaggedPartition, gauge: &Gauge) -> bool {
    partition.cells.iter().all(|c| gauge.admits(&c.cell, &c.tag))
}

const COUSIN_MAX_CELLS: usize = 1 << 22;

/// Constructive Cousin lemma: bisect along the longest axis until each cell has
/// a corner or its center as an admissible tag.
pub fn cousin_partition(bx: &Interval, gauge: &Gauge) -> Result<TaggedPartition, HkError> {
    let max_depth = 60 * bx.dim();
    let mut out = Vec::new();
    let mut stack = vec![(bx.clone(), 0usize)];
    while let Some((cell, depth)) = stack.pop() {
        let mut candidates = cell.corners();
        candidates.push(cell.center());
        if let Some(tag) = candidates.into_iter().find(|t| gauge.admits(&cell, t)) {
            out.push(TaggedCell { cell, tag });
            if out.len() > COUSIN_MAX_CELLS {
                return Err(HkError::DepthBudget(format!("more than {COUSIN_MAX_CELLS} cells")));
            }
            continue;
        }
        if depth >= max_depth {
            return Err(HkError::DepthBudget(format!(
                "cell {cell} still too coarse after {depth} bisections"
            )));
        }
        let (a, b) = cell.bisect_axis(cell.longest_axis());
        stack.push((b, depth + 1));
        stack.push((a, depth + 1));
    }
    out.sort_by(|a, b| cmp_points(a.cell.lower(), b.cell.lower()));
    TaggedPartition::new(bx.clone(), out)
}

/// `Σ f(tag)·vol(cell)`. Tags at declared singular points contribute zero.
pub fn riemann_sum(f: &FuncExpr, partition: &TaggedPartition) -> Result<f64, HkError> {
    let mut sum = NeumaierSum::default();
    for c in &partition.cells {
        if f.is_singular(&c.tag) {
            continue;
        }
        sum.add(f.eval(&c.tag)? * c.cell.volume());
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(lo: f64, hi: f64) -> Interval {
        Interval::segment(lo, hi).unwrap()
    }

    fn halves() -> TaggedPartition {
        TaggedPartition::new(
            seg(0.0, 1.0),
            vec![
                TaggedCell { cell: seg(0.0, 0.5), tag: vec![0.25] },
                TaggedCell { cell: seg(0.5, 1.0), tag: vec![0.75] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn fineness_examples() {
        let p = halves();
        assert!(is_delta_fine(&p, &Gauge::constant(0.6).unwrap()));
        assert!(!is_delta_fine(&p, &Gauge::constant(0.2).unwrap()));
        let single =
            TaggedPartition::new(seg(0.0, 1.0), vec![TaggedCell { cell: seg(0.0, 1.0), tag: vec![0.0] }]).unwrap();
        assert!(is_delta_fine(&single, &Gauge::constant(2.0).unwrap()));
    }

    #[test]
    fn invalid_partitions() {
        let tag_outside = vec![TaggedCell { cell: seg(0.0, 1.0), tag: vec![1.5] }];
        assert!(TaggedPartition::new(seg(0.0, 1.0), tag_outside).is_err());
        let overlap = vec![
            TaggedCell { cell: seg(0.0, 0.6), tag: vec![0.1] },
            TaggedCell { cell: seg(0.4, 1.0), tag: vec![0.9] },
        ];
        assert!(TaggedPartition::new(seg(0.0, 1.0), overlap).is_err());
        let gap = vec![TaggedCell { cell: seg(0.0, 0.5), tag: vec![0.1] }];
        assert!(TaggedPartition::new(seg(0.0, 1.0), gap).is_err());
    }

    #[test]
    fn cousin_examples() {
        let unit = seg(0.0, 1.0);
        let g = Gauge::constant(0.3).unwrap();
        let p = cousin_partition(&unit, &g).unwrap();
        assert!(is_delta_fine(&p, &g));
        assert!(p.cells().iter().all(|c| c.cell.width(0) <= 0.6));

        let radial = Gauge::radial(vec![0.0], 0.5, 1e-6).unwrap();
        let p = cousin_partition(&unit, &radial).unwrap();
        assert!(is_delta_fine(&p, &radial));
        let first = p.cells().iter().find(|c| c.cell.contains(&[0.0])).unwrap();
        assert!(first.tag[0] <= 1e-6 && first.cell.width(0) <= 2e-6);

        let square = Interval::cube(0.0, 1.0, 2).unwrap();
        let p = cousin_partition(&square, &Gauge::constant(10.0).unwrap()).unwrap();
        assert_eq!(p.len(), 1);
        assert!(square.corners().contains(&p.cells()[0].tag));
    }

    #[test]
    fn riemann_sum_examples() {
        let unit = seg(0.0, 1.0);
        let x = FuncExpr::parse("x1", unit.clone()).unwrap();
        assert_eq!(riemann_sum(&x, &halves()).unwrap(), 0.5);
        let chi = FuncExpr::indicator(seg(0.0, 0.5), unit.clone()).unwrap();
        assert_eq!(riemann_sum(&chi, &halves()).unwrap(), 0.5);
        let square = Interval::cube(0.0, 1.0, 2).unwrap();
        let one = FuncExpr::constant(1.0, square.clone()).unwrap();
        let p = cousin_partition(&square, &Gauge::radial(vec![0.3, 0.7], 0.4, 1e-3).unwrap()).unwrap();
        assert!((riemann_sum(&one, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinned_singular_tag_contributes_zero() {
        let unit = seg(0.0, 1.0);
        let osc = FuncExpr::from_builtin(crate::funcspec::Builtin::OscDeriv, unit.clone()).unwrap();
        let p = TaggedPartition::new(unit.clone(), vec![TaggedCell { cell: unit.clone(), tag: vec![0.0] }]).unwrap();
        assert_eq!(riemann_sum(&osc, &p).unwrap(), 0.0);
        // an undeclared singularity is an error
        let inv = FuncExpr::parse("1/x1", unit.clone()).unwrap();
        assert!(riemann_sum(&inv, &p).is_err());
    }
}
