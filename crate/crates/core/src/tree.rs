//! Finite ordered unranked trees.
//!
//! A [`Tree`] is a label with an ordered, possibly empty, list of children.
//! Nodes are addressed by [`Position`]s: sequences of 1-based child indices,
//! the empty sequence denoting the root. Positions compare in lexicographic
//! order, where a proper prefix is smaller than its extensions.
//!
//! Trees have a compact term syntax, `a(b(a,c(b)),c,a(a,c))`, read by
//! [`Tree::parse`] and written by the `Display` impl.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A node label: an XML element name or any other uninterpreted token.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

pub(crate) fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')
}

impl Label {
    pub fn new(name: &str) -> Result<Self> {
        if name.is_empty() || !name.chars().all(is_token_char) {
            return Err(Error::InvalidLabel(name.to_string()));
        }
        Ok(Label(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A node address; the empty path is the root.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn from_path(path: Vec<usize>) -> Self {
        debug_assert!(path.iter().all(|&i| i >= 1));
        Position(path)
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Self {
        let mut path = self.0.clone();
        path.push(index);
        Position(path)
    }

    pub fn parent(&self) -> Option<Self> {
        let (_, init) = self.0.split_last()?;
        Some(Position(init.to_vec()))
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "eps" {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|part| match part.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i),
                _ => Err(Error::syntax(s, 0, format!("bad position component `{part}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Position)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tree {
    label: Label,
    children: Vec<Tree>,
}

impl Tree {
    pub fn new(label: Label, children: Vec<Tree>) -> Self {
        Tree { label, children }
    }

    pub fn leaf(label: Label) -> Self {
        Tree::new(label, Vec::new())
    }

    /// Parses the term syntax; see the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        TermParser::new(text).parse_document()
    }

    pub fn label(&self) -> &Label {
        &self.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn into_parts(self) -> (Label, Vec<Tree>) {
        (self.label, self.children)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Tree::depth).max().unwrap_or(0)
    }

    /// All positions, in ascending lexicographic order (preorder).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        for (i, child) in self.children.iter().enumerate() {
            path.push(i + 1);
            child.collect_positions(path, out);
            path.pop();
        }
    }

    /// Labels in preorder.
    pub fn preorder_labels(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.walk(&mut |t| out.push(t.label.clone()));
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Tree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// Every label occurring in the tree.
    pub fn labels(&self) -> std::collections::BTreeSet<Label> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |t| {
            out.insert(t.label.clone());
        });
        out
    }

    pub fn get(&self, p: &Position) -> Option<&Tree> {
        let mut node = self;
        for &i in &p.0 {
            node = node.children.get(i.checked_sub(1)?)?;
        }
        Some(node)
    }

    /// The subtree rooted at `p`.
    pub fn subtree_at(&self, p: &Position) -> Result<&Tree> {
        self.get(p).ok_or_else(|| Error::PositionNotInTree(p.clone()))
    }

    /// Replaces the subtree at `p` by the hedge `h`, shifting the following
    /// siblings. An empty hedge deletes the subtree. At the root, `h` must
    /// contain exactly one tree.
    pub fn replace_at(&self, p: &Position, h: Hedge) -> Result<Tree> {
        if self.get(p).is_none() {
            return Err(Error::PositionNotInTree(p.clone()));
        }
        let Some((&last, parent_path)) = p.0.split_last() else {
            return match <[Tree; 1]>::try_from(h.0) {
                Ok([t]) => Ok(t),
                Err(items) => Err(Error::RootReplacedByNonSingleton(items.len())),
            };
        };
        let mut out = self.clone();
        let mut parent = &mut out;
        for &i in parent_path {
            parent = &mut parent.children[i - 1];
        }
        parent.children.splice(last - 1..last, h.0);
        Ok(out)
    }

    pub(crate) fn get_mut(&mut self, p: &Position) -> Option<&mut Tree> {
        let mut node = self;
        for &i in &p.0 {
            node = node.children.get_mut(i.checked_sub(1)?)?;
        }
        Some(node)
    }

    pub(crate) fn children_mut(&mut self) -> &mut Vec<Tree> {
        &mut self.children
    }

    pub(crate) fn set_label(&mut self, label: Label) {
        self.label = label;
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Tree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tree::parse(s)
    }
}

/// An ordered sequence of trees; the empty hedge is ε.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Hedge(pub Vec<Tree>);

impl Hedge {
    pub fn empty() -> Self {
        Hedge(Vec::new())
    }

    pub fn single(t: Tree) -> Self {
        Hedge(vec![t])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(mut self, other: Hedge) -> Hedge {
        self.0.extend(other.0);
        self
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tree> {
        self.0.iter()
    }
}

impl From<Vec<Tree>> for Hedge {
    fn from(items: Vec<Tree>) -> Self {
        Hedge(items)
    }
}

impl FromIterator<Tree> for Hedge {
    fn from_iter<I: IntoIterator<Item = Tree>>(iter: I) -> Self {
        Hedge(iter.into_iter().collect())
    }
}

impl IntoIterator for Hedge {
    type Item = Tree;
    type IntoIter = std::vec::IntoIter<Tree>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for Hedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

// tree := label | label '(' ')' | label '(' tree (',' tree)* ')'
struct TermParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> TermParser<'a> {
    fn new(text: &'a str) -> Self {
        TermParser { text, pos: 0 }
    }

    fn parse_document(mut self) -> Result<Tree> {
        let t = self.tree()?;
        self.skip_ws();
        if self.pos < self.text.len() {
            return Err(self.error("trailing input after term"));
        }
        Ok(t)
    }

    fn error(&self, message: &str) -> Error {
        Error::syntax(self.text, self.pos, message)
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn tree(&mut self) -> Result<Tree> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !is_token_char(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        if start == self.pos {
            return Err(self.error("expected a label"));
        }
        let label = Label::new(&self.text[start..self.pos])?;
        self.skip_ws();
        let mut children = Vec::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            self.skip_ws();
            if self.peek() == Some(')') {
                self.pos += 1;
                return Ok(Tree::leaf(label));
            }
            loop {
                children.push(self.tree()?);
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        Ok(Tree::new(label, children))
    }
}
