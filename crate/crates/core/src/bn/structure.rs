use serde::{Deserialize, Serialize};

use crate::vars;
use crate::{Error, Result};

/// Directed acyclic graph over named nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStructure {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl NetworkStructure {
    pub fn new(nodes: &[&str], edges: &[(&str, &str)]) -> Self {
        NetworkStructure {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    /// MOD, EbN0, C/I and Dop_Phi each point at BER.
    pub fn ber_default() -> Self {
        NetworkStructure::new(
            &[vars::MOD, vars::EBN0, vars::CI, vars::DOP_PHI, vars::BER],
            &[
                (vars::EBN0, vars::BER),
                (vars::CI, vars::BER),
                (vars::MOD, vars::BER),
                (vars::DOP_PHI, vars::BER),
            ],
        )
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Parents of `child`, in node declaration order.
    pub fn parents(&self, child: &str) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| self.edges.iter().any(|(p, c)| p == *n && c == child))
            .map(String::as_str)
            .collect()
    }

    pub fn is_root(&self, node: &str) -> bool {
        !self.edges.iter().any(|(_, c)| c == node)
    }

    pub fn validate(&self) -> Result<()> {
        self.topological_order().map(|_| ())
    }

    /// Kahn's algorithm; ties are broken by declaration order.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        for (i, n) in self.nodes.iter().enumerate() {
            if self.nodes[..i].contains(n) {
                return Err(Error::invalid(format!("node {n:?} declared twice")));
            }
        }
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut children = vec![Vec::new(); self.nodes.len()];
        for (p, c) in &self.edges {
            let pi = self.node_index(p).ok_or_else(|| Error::UndeclaredNode(p.clone()))?;
            let ci = self.node_index(c).ok_or_else(|| Error::UndeclaredNode(c.clone()))?;
            indegree[ci] += 1;
            children[pi].push(ci);
        }
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut done = vec![false; self.nodes.len()];
        while order.len() < self.nodes.len() {
            let next = (0..self.nodes.len()).find(|&i| !done[i] && indegree[i] == 0);
            let Some(i) = next else {
                let stuck = (0..self.nodes.len()).find(|&i| !done[i]).unwrap();
                return Err(Error::Cycle(self.nodes[stuck].clone()));
            };
            done[i] = true;
            order.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
            }
        }
        Ok(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_network_is_valid() {
        let s = NetworkStructure::ber_default();
        s.validate().unwrap();
        assert_eq!(s.parents(vars::BER), vec!["MOD", "EbN0", "C/I", "Dop_Phi"]);
        assert!(s.is_root(vars::EBN0));
        assert!(!s.is_root(vars::BER));
        assert_eq!(s.edges.len(), 4);
        let order = s.topological_order().unwrap();
        assert_eq!(*order.last().unwrap(), s.node_index(vars::BER).unwrap());
    }

    #[test]
    fn two_cycle_is_rejected() {
        let s = NetworkStructure::new(&["A", "B"], &[("A", "B"), ("B", "A")]);
        assert!(matches!(s.validate(), Err(Error::Cycle(_))));
    }

    #[test]
    fn self_loop_is_rejected() {
        let s = NetworkStructure::new(&["A"], &[("A", "A")]);
        assert!(matches!(s.validate(), Err(Error::Cycle(_))));
    }

    #[test]
    fn undeclared_endpoint_is_rejected() {
        let s = NetworkStructure::new(&["A", "B"], &[("A", "X")]);
        assert!(matches!(s.validate(), Err(Error::UndeclaredNode(ref n)) if n == "X"));
    }

    #[test]
    fn duplicate_nodes_are_rejected() {
        assert!(NetworkStructure::new(&["A", "A"], &[]).validate().is_err());
    }
}
