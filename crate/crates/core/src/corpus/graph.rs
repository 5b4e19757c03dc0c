use crate::error::{Error, Result};

/// Bipartite user–item interaction graph with binary edges.
///
/// Adjacency lists are sorted ascending and free of duplicates; the user and item
/// lists are exact transposes of each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    user_adj: Vec<Vec<usize>>,
    item_adj: Vec<Vec<usize>>,
}

impl InteractionGraph {
    /// Builds a graph from `(user, item)` pairs. Duplicate pairs collapse to a single edge.
    pub fn from_edges(num_users: usize, num_items: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut user_adj = vec![Vec::new(); num_users];
        let mut item_adj = vec![Vec::new(); num_items];
        for &(u, i) in edges {
            if u >= num_users || i >= num_items {
                return Err(Error::param(format!(
                    "edge ({u}, {i}) out of range for {num_users} users x {num_items} items"
                )));
            }
            user_adj[u].push(i);
        }
        for items in user_adj.iter_mut() {
            items.sort_unstable();
            items.dedup();
        }
        // filling in user order keeps each item list sorted
        for (u, items) in user_adj.iter().enumerate() {
            for &i in items {
                item_adj[i].push(u);
            }
        }
        Ok(InteractionGraph { user_adj, item_adj })
    }

    pub fn num_users(&self) -> usize {
        self.user_adj.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.user_adj.iter().map(Vec::len).sum()
    }

    /// Items interacted by `user`, ascending.
    pub fn user_items(&self, user: usize) -> &[usize] {
        &self.user_adj[user]
    }

    /// Users who interacted with `item`, ascending.
    pub fn item_users(&self, item: usize) -> &[usize] {
        &self.item_adj[item]
    }

    pub fn user_degree(&self, user: usize) -> usize {
        self.user_adj[user].len()
    }

    pub fn item_degree(&self, item: usize) -> usize {
        self.item_adj[item].len()
    }

    pub fn user_degrees(&self) -> Vec<usize> {
        self.user_adj.iter().map(Vec::len).collect()
    }

    pub fn item_degrees(&self) -> Vec<usize> {
        self.item_adj.iter().map(Vec::len).collect()
    }

    pub fn contains(&self, user: usize, item: usize) -> bool {
        self.user_adj
            .get(user)
            .is_some_and(|items| items.binary_search(&item).is_ok())
    }

    /// All edges in user-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.user_adj
            .iter()
            .enumerate()
            .flat_map(|(u, items)| items.iter().map(move |&i| (u, i)))
    }

    /// Checks the structural invariants: sorted, duplicate-free, in-range adjacency and
    /// mutually transposed user/item lists.
    pub fn check_consistency(&self) -> Result<()> {
        let n_items = self.num_items();
        let n_users = self.num_users();
        for (u, items) in self.user_adj.iter().enumerate() {
            if items.windows(2).any(|w| w[0] >= w[1]) || items.iter().any(|&i| i >= n_items) {
                return Err(Error::param(format!("user {u} adjacency is not sorted/unique/in-range")));
            }
        }
        for (i, users) in self.item_adj.iter().enumerate() {
            if users.windows(2).any(|w| w[0] >= w[1]) || users.iter().any(|&u| u >= n_users) {
                return Err(Error::param(format!("item {i} adjacency is not sorted/unique/in-range")));
            }
            if let Some(&u) = users.iter().find(|&&u| !self.contains(u, i)) {
                return Err(Error::param(format!("edge ({u}, {i}) missing from user adjacency")));
            }
        }
        let item_side: usize = self.item_adj.iter().map(Vec::len).sum();
        if item_side != self.num_edges() {
            return Err(Error::param("user and item adjacency edge counts differ"));
        }
        Ok(())
    }
}
