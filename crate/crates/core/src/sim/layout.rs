use serde::{Deserialize, Serialize};

use crate::error::{QusoError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

/// Named, contiguous qubit ranges laid out in declaration order from qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: usize,
}

impl RegisterLayout {
    pub fn new<S: AsRef<str>>(spec: &[(S, usize)]) -> Result<Self> {
        let mut registers = Vec::with_capacity(spec.len());
        let mut offset = 0;
        for (name, width) in spec {
            let name = name.as_ref();
            if registers.iter().any(|r: &Register| r.name == name) {
                return Err(QusoError::InvalidArgument(format!(
                    "register `{name}` declared twice"
                )));
            }
            registers.push(Register {
                name: name.to_string(),
                offset,
                width: *width,
            });
            offset += width;
        }
        Ok(Self {
            registers,
            total: offset,
        })
    }

    /// The full pipeline layout `c, p, q, l, f, l', d`.
    ///
    /// `m` edges, `k` phase qubits, `n_nodes` data dimension.
    pub fn pipeline(m: usize, k: usize, n_nodes: usize) -> Self {
        Self::new(&[
            ("c", m),
            ("p", k),
            ("q", 1),
            ("l", ceil_log2(m + 1)),
            ("f", 1),
            ("l'", 1),
            ("d", ceil_log2(n_nodes)),
        ])
        .expect("fixed register names are distinct")
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| QusoError::UnknownRegister(name.to_string()))
    }

    pub fn has(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn offset(&self, name: &str) -> Result<usize> {
        Ok(self.register(name)?.offset)
    }

    pub fn width(&self, name: &str) -> Result<usize> {
        Ok(self.register(name)?.width)
    }

    /// Global index of local qubit `i` of a register.
    pub fn qubit(&self, name: &str, i: usize) -> Result<usize> {
        let r = self.register(name)?;
        if i >= r.width {
            return Err(QusoError::QubitOutOfRange {
                qubit: i,
                num_qubits: r.width,
            });
        }
        Ok(r.offset + i)
    }

    /// Global qubit indices of a register, least significant first.
    pub fn qubits(&self, name: &str) -> Result<Vec<usize>> {
        let r = self.register(name)?;
        Ok((r.offset..r.offset + r.width).collect())
    }

    /// Concatenated qubits of several registers.
    pub fn qubits_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for n in names {
            out.extend(self.qubits(n)?);
        }
        Ok(out)
    }

    /// Value of a register inside a global basis index.
    pub fn extract(&self, index: usize, name: &str) -> Result<usize> {
        let r = self.register(name)?;
        Ok((index >> r.offset) & ((1usize << r.width) - 1))
    }

    /// Overwrites a register's bits inside a global basis index.
    pub fn deposit(&self, index: usize, name: &str, value: usize) -> Result<usize> {
        let r = self.register(name)?;
        let mask = ((1usize << r.width) - 1) << r.offset;
        if value >> r.width != 0 {
            return Err(QusoError::InvalidArgument(format!(
                "value {value} does not fit register `{name}` of width {}",
                r.width
            )));
        }
        Ok((index & !mask) | (value << r.offset))
    }

    /// Layout containing only the registers not listed in `removed`, in the
    /// original order.
    pub fn without(&self, removed: &[&str]) -> Result<Self> {
        for r in removed {
            self.register(r)?;
        }
        let keep: Vec<(&str, usize)> = self
            .registers
            .iter()
            .filter(|r| !removed.contains(&r.name.as_str()))
            .map(|r| (r.name.as_str(), r.width))
            .collect();
        Self::new(&keep)
    }
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1, "ceil_log2 of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_pipeline_is_sixteen_qubits() {
        let l = RegisterLayout::pipeline(6, 2, 4);
        assert_eq!(l.total_qubits(), 16);
        let widths: Vec<_> = l.registers().iter().map(|r| (r.name.as_str(), r.width)).collect();
        assert_eq!(
            widths,
            [("c", 6), ("p", 2), ("q", 1), ("l", 3), ("f", 1), ("l'", 1), ("d", 2)]
        );
        assert_eq!(l.offset("d").unwrap(), 14);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            [1, 2, 3, 4, 5, 7, 8, 9].map(ceil_log2),
            [0, 1, 2, 2, 3, 3, 3, 4]
        );
    }

    #[test]
    fn extract_and_deposit() {
        let l = RegisterLayout::new(&[("a", 2), ("b", 3)]).unwrap();
        let idx = l.deposit(0, "b", 5).unwrap();
        assert_eq!(idx, 5 << 2);
        assert_eq!(l.extract(idx | 1, "b").unwrap(), 5);
        assert_eq!(l.extract(idx | 1, "a").unwrap(), 1);
        assert!(l.deposit(0, "a", 4).is_err());
        assert!(matches!(l.offset("z"), Err(QusoError::UnknownRegister(_))));
    }

    #[test]
    fn without_keeps_order() {
        let l = RegisterLayout::new(&[("a", 1), ("b", 2), ("c", 3)]).unwrap();
        let w = l.without(&["b"]).unwrap();
        assert_eq!(w.offset("c").unwrap(), 1);
        assert_eq!(w.total_qubits(), 4);
    }
}
