use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math::{Aabb, Vec3};

use super::obstacles::{segment_collides, ObstacleSet};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RrtError {
    #[error("start point lies inside an obstacle")]
    StartInObstacle,
    #[error("goal point lies inside an obstacle")]
    GoalInObstacle,
    #[error("start or goal lies outside the sampling bounds")]
    OutOfBounds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtParams {
    pub step_size: f64,
    pub max_iterations: usize,
    pub goal_bias: f64,
    /// Rewiring radius is `neighbor_radius_scale * (ln n / n)^(1/3)`.
    pub neighbor_radius_scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrtPath {
    pub points: Vec<Vec3>,
    pub cost: f64,
    pub tree_size: usize,
}

struct Tree {
    points: Vec<Vec3>,
    parent: Vec<usize>,
    cost: Vec<f64>,
    children: Vec<Vec<usize>>,
}

impl Tree {
    fn push(&mut self, p: Vec3, parent: usize, cost: f64) -> usize {
        let i = self.points.len();
        self.points.push(p);
        self.parent.push(parent);
        self.cost.push(cost);
        self.children.push(Vec::new());
        if i != parent {
            self.children[parent].push(i);
        }
        i
    }

    fn nearest(&self, p: &Vec3) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in self.points.iter().enumerate() {
            let d = (p - q).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn within(&self, p: &Vec3, r: f64) -> Vec<usize> {
        let r2 = r * r;
        (0..self.points.len()).filter(|&i| (self.points[i] - p).norm_squared() <= r2).collect()
    }

    fn reparent(&mut self, node: usize, new_parent: usize, new_cost: f64) {
        let old = self.parent[node];
        self.children[old].retain(|&c| c != node);
        self.children[new_parent].push(node);
        self.parent[node] = new_parent;
        let delta = new_cost - self.cost[node];
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            self.cost[n] += delta;
            stack.extend(self.children[n].iter().copied());
        }
    }

    fn path_to(&self, mut node: usize) -> Vec<Vec3> {
        let mut out = vec![self.points[node]];
        while self.parent[node] != node {
            node = self.parent[node];
            out.push(self.points[node]);
        }
        out.reverse();
        out
    }
}

/// RRT* from `start` to `goal` sampling uniformly inside `bounds`.
///
/// Runs all `max_iterations`, so the best cost can only fall as the budget
/// grows. `Ok(None)` means the budget ran out before the goal was reached.
pub fn plan_rrt_star(start: &Vec3, goal: &Vec3, obstacles: &ObstacleSet, bounds: &Aabb, params: &RrtParams) -> Result<Option<RrtPath>, RrtError> {
    if obstacles.contains_point(start) {
        return Err(RrtError::StartInObstacle);
    }
    if obstacles.contains_point(goal) {
        return Err(RrtError::GoalInObstacle);
    }
    if !bounds.contains(start) || !bounds.contains(goal) {
        return Err(RrtError::OutOfBounds);
    }
    if (goal - start).norm() < 1e-9 {
        return Ok(Some(RrtPath {
            points: vec![*start, *goal],
            cost: 0.0,
            tree_size: 1,
        }));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tree = Tree {
        points: Vec::new(),
        parent: Vec::new(),
        cost: Vec::new(),
        children: Vec::new(),
    };
    tree.push(*start, 0, 0.0);
    let mut goal_node: Option<usize> = None;

    for _ in 0..params.max_iterations {
        let sample = if rng.random::<f64>() < params.goal_bias {
            *goal
        } else {
            Vec3::from_fn(|k, _| rng.random_range(bounds.min[k]..=bounds.max[k]))
        };
        let near = tree.nearest(&sample);
        let offset = sample - tree.points[near];
        let dist = offset.norm();
        if dist < 1e-12 {
            continue;
        }
        let new = if dist <= params.step_size {
            sample
        } else {
            tree.points[near] + offset * (params.step_size / dist)
        };
        let is_goal = (new - goal).norm() < 1e-12;
        if is_goal && goal_node.is_some() {
            continue;
        }
        if segment_collides(&tree.points[near], &new, obstacles) {
            continue;
        }

        let n = tree.points.len() as f64 + 1.0;
        let radius = (params.neighbor_radius_scale * (n.ln() / n).cbrt()).max(params.step_size);
        let neighbors = tree.within(&new, radius);
        let mut parent = near;
        let mut best = tree.cost[near] + (new - tree.points[near]).norm();
        for &j in &neighbors {
            let c = tree.cost[j] + (new - tree.points[j]).norm();
            if c < best && !segment_collides(&tree.points[j], &new, obstacles) {
                best = c;
                parent = j;
            }
        }
        let idx = tree.push(new, parent, best);
        for &j in &neighbors {
            if j == parent {
                continue;
            }
            let c = best + (tree.points[j] - new).norm();
            if c < tree.cost[j] - 1e-12 && !segment_collides(&new, &tree.points[j], obstacles) {
                tree.reparent(j, idx, c);
            }
        }

        if is_goal {
            goal_node = Some(idx);
        } else if goal_node.is_none() && (goal - new).norm() <= params.step_size && !segment_collides(&new, goal, obstacles) {
            let c = best + (goal - new).norm();
            goal_node = Some(tree.push(*goal, idx, c));
        }
    }

    Ok(goal_node.map(|g| RrtPath {
        points: tree.path_to(g),
        cost: tree.cost[g],
        tree_size: tree.points.len(),
    }))
}

pub fn path_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}
