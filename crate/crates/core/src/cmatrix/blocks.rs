use serde::{Deserialize, Serialize};

use super::CMatrix;
use crate::error::{Error, Result};

/// Block data `(m_1, .., m_k)` with multiplicities `(d_1, .., d_k)`.
///
/// The ambient dimension is `sum d_i * m_i`. With all `d_i = 1` this is the
/// ordinary direct sum `M_{m_1} ⊕ .. ⊕ M_{m_k}`; otherwise the `i`-th
/// diagonal block has the tensor shape `1_{d_i} ⊗ a_i` with `a_i ∈ M_{m_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BlockRepr", into = "BlockRepr")]
pub struct BlockStructure {
    blocks: Vec<usize>,
    multiplicities: Vec<usize>,
}

impl BlockStructure {
    pub fn new(blocks: Vec<usize>, multiplicities: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Empty("block structure needs at least one block"));
        }
        if blocks.len() != multiplicities.len() {
            return Err(Error::Malformed(format!(
                "{} blocks but {} multiplicities",
                blocks.len(),
                multiplicities.len()
            )));
        }
        if blocks.iter().chain(&multiplicities).any(|&x| x == 0) {
            return Err(Error::Parameter("block sizes and multiplicities must be positive".into()));
        }
        Ok(Self { blocks, multiplicities })
    }

    /// Multiplicity-one structure.
    pub fn simple(blocks: Vec<usize>) -> Result<Self> {
        let ones = vec![1; blocks.len()];
        Self::new(blocks, ones)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities.iter().all(|&d| d == 1)
    }

    /// `sum d_i * m_i`.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().zip(&self.multiplicities).map(|(m, d)| m * d).sum()
    }

    /// Sizes `d_i * m_i` of the diagonal blocks as they sit in the ambient matrix.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().zip(&self.multiplicities).map(|(m, d)| m * d).collect()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        let total = self.total_dim();
        if total != dim {
            return Err(Error::DimensionMismatch { expected: total, found: dim });
        }
        Ok(())
    }

    /// Extracts `(a_1, .., a_k)` by averaging the `d_i` diagonal copies of each block.
    pub fn extract_pattern(&self, x: &CMatrix) -> Result<Vec<CMatrix>> {
        self.check_dim(x.dim())?;
        let mut offset = 0;
        let mut out = Vec::with_capacity(self.blocks.len());
        for (&m, &d) in self.blocks.iter().zip(&self.multiplicities) {
            let mut acc = CMatrix::zeros(m);
            for copy in 0..d {
                acc = &acc + &x.sub_block(offset + copy * m, m);
            }
            out.push(acc.scale_real(1.0 / d as f64));
            offset += m * d;
        }
        Ok(out)
    }

    /// The pattern matrix `diag(1_{d_1} ⊗ a_1, .., 1_{d_k} ⊗ a_k)`.
    pub fn assemble(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.blocks.len() {
            return Err(Error::Malformed(format!(
                "{} pattern blocks for a {}-block structure",
                parts.len(),
                self.blocks.len()
            )));
        }
        let mut diag = Vec::new();
        for ((a, &m), &d) in parts.iter().zip(&self.blocks).zip(&self.multiplicities) {
            if a.dim() != m {
                return Err(Error::DimensionMismatch { expected: m, found: a.dim() });
            }
            diag.extend(std::iter::repeat_n(a.clone(), d));
        }
        Ok(CMatrix::block_diag(&diag))
    }

    /// Max-entry distance from `x` to the nearest pattern matrix obtained by
    /// block averaging. For multiplicity-one structures this is exactly the
    /// largest off-block entry.
    pub fn pattern_residual(&self, x: &CMatrix) -> Result<f64> {
        if self.is_simple() {
            return x.off_block_magnitude(self);
        }
        let fitted = self.assemble(&self.extract_pattern(x)?)?;
        Ok(x.max_abs_diff(&fitted))
    }
}

#[derive(Serialize, Deserialize)]
struct BlockRepr {
    blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    multiplicities: Option<Vec<usize>>,
}

impl TryFrom<BlockRepr> for BlockStructure {
    type Error = Error;
    fn try_from(r: BlockRepr) -> Result<Self> {
        match r.multiplicities {
            Some(d) => BlockStructure::new(r.blocks, d),
            None => BlockStructure::simple(r.blocks),
        }
    }
}

impl From<BlockStructure> for BlockRepr {
    fn from(s: BlockStructure) -> Self {
        BlockRepr { blocks: s.blocks, multiplicities: Some(s.multiplicities) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::c;

    #[test]
    fn tensor_pattern_extraction() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]]).unwrap();
        let s = BlockStructure::new(vec![2], vec![2]).unwrap();
        let x = CMatrix::repeat_diag(&a, 2);
        let parts = s.extract_pattern(&x).unwrap();
        assert_eq!(parts[0], a);
        assert_eq!(s.pattern_residual(&x).unwrap(), 0.0);
    }

    #[test]
    fn rejects_zero_and_mismatched_lengths() {
        assert!(BlockStructure::simple(vec![]).is_err());
        assert!(BlockStructure::simple(vec![2, 0]).is_err());
        assert!(BlockStructure::new(vec![1, 1], vec![1]).is_err());
    }

    #[test]
    fn default_multiplicities_from_json() {
        let s: BlockStructure = serde_json::from_str(r#"{"blocks":[2,1,1]}"#).unwrap();
        assert!(s.is_simple());
        assert_eq!(s.total_dim(), 4);
    }
}
