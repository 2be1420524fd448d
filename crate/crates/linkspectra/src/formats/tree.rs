//! Partition trees as JSON: the column labels of the relation space plus the
//! nested binary tree over those labels.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use linkspectra_core::{PartitionTree, RelationSpace, TreeNode};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::open;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    /// Relation labels in column order.
    pub relations: Vec<String>,
    /// Nested pairs of relation labels; leaves are strings.
    pub tree: Value,
}

impl TreeFile {
    pub fn new(space: &RelationSpace, tree: &PartitionTree) -> Self {
        let relations = space.relation_labels();
        fn nest(node: &TreeNode, labels: &[String]) -> Value {
            match node {
                TreeNode::Leaf(r) => Value::String(labels[*r].clone()),
                TreeNode::Split(a, b) => Value::Array(vec![nest(a, labels), nest(b, labels)]),
            }
        }
        let tree = nest(&tree.to_nested(), &relations);
        Self { relations, tree }
    }

    pub fn space(&self) -> Result<RelationSpace> {
        Ok(RelationSpace::from_relation_labels(&self.relations)?)
    }

    pub fn partition(&self) -> Result<PartitionTree> {
        let index: HashMap<&str, usize> = self.relations.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        fn parse(v: &Value, index: &HashMap<&str, usize>) -> std::result::Result<TreeNode, String> {
            match v {
                Value::String(s) => index.get(s.as_str()).map(|&r| TreeNode::Leaf(r)).ok_or_else(|| format!("unknown relation `{s}`")),
                Value::Array(kids) if kids.len() == 2 => {
                    Ok(TreeNode::split(parse(&kids[0], index)?, parse(&kids[1], index)?))
                }
                _ => Err("tree nodes must be a label or a pair of nodes".into()),
            }
        }
        let root = parse(&self.tree, &index).map_err(linkspectra_core::Error::InvalidTree)?;
        Ok(PartitionTree::from_nested(&root)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        serde_json::from_reader(open(path)?).map_err(|e| CliError::format(path, e.to_string()))
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}
