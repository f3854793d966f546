use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingError, WalkSet};
use crate::alias::AliasTable;
use crate::scalar::Scalar;
use crate::topic::{Level, TopicId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// One thread; bit-for-bit reproducible under a fixed seed.
    Deterministic,
    /// Lock-free updates from several threads. Reproducible only
    /// statistically.
    Concurrent { threads: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub dimensions: usize,
    /// Context radius on each side of the center node.
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    /// Floor for the linear decay, as a fraction of the initial rate.
    pub min_learning_rate_fraction: f64,
    pub seed: u64,
    pub mode: TrainMode,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            dimensions: 64,
            window: 10,
            negative_samples: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            min_learning_rate_fraction: 1e-4,
            seed: 42,
            mode: TrainMode::Deterministic,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidParams(m.to_string()));
        if self.dimensions < 1 {
            return bad("dimensions must be at least 1");
        }
        if self.window < 1 {
            return bad("window must be at least 1");
        }
        if self.negative_samples < 1 {
            return bad("negative samples must be at least 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if !(self.initial_learning_rate.is_finite() && self.initial_learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(0.0..=1.0).contains(&self.min_learning_rate_fraction) {
            return bad("learning-rate floor must be a fraction in [0, 1]");
        }
        if let TrainMode::Concurrent { threads: 0 } = self.mode {
            return bad("concurrent training needs at least one thread");
        }
        Ok(())
    }
}

/// One vector per node, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    pub level: Level,
    pub nodes: Vec<TopicId>,
    pub dimensions: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn new(
        level: Level,
        nodes: Vec<TopicId>,
        dimensions: usize,
        data: Vec<T>,
    ) -> Result<Self, EmbeddingError> {
        if dimensions == 0 || data.len() != nodes.len() * dimensions {
            return Err(EmbeddingError::InvalidParams(format!(
                "{} values for {} nodes of dimension {}",
                data.len(),
                nodes.len(),
                dimensions
            )));
        }
        Ok(EmbeddingMatrix {
            level,
            nodes,
            dimensions,
            data,
        })
    }

    pub fn vector(&self, node: usize) -> &[T] {
        &self.data[node * self.dimensions..(node + 1) * self.dimensions]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Parameter rows stored as raw bits so that concurrent trainers can read and
/// write them without locks. Single-threaded use behaves like a plain `Vec`.
struct SharedRows<T> {
    cells: Vec<AtomicU64>,
    dims: usize,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> SharedRows<T> {
    fn new(values: impl IntoIterator<Item = T>, dims: usize) -> Self {
        SharedRows {
            cells: values.into_iter().map(|v| AtomicU64::new(v.to_bits64())).collect(),
            dims,
            _scalar: std::marker::PhantomData,
        }
    }

    #[inline]
    fn read(&self, row: usize, out: &mut [T]) {
        let cells = &self.cells[row * self.dims..(row + 1) * self.dims];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = T::from_bits64(c.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * delta`, element-wise, without synchronization.
    #[inline]
    fn add_scaled(&self, row: usize, scale: T, delta: &[T]) {
        let cells = &self.cells[row * self.dims..(row + 1) * self.dims];
        for (c, &d) in cells.iter().zip(delta) {
            let v = T::from_bits64(c.load(Ordering::Relaxed));
            c.store((v + scale * d).to_bits64(), Ordering::Relaxed);
        }
    }

    fn into_values(self) -> Vec<T> {
        self.cells
            .into_iter()
            .map(|c| T::from_bits64(c.into_inner()))
            .collect()
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

struct Trainer<'a, T> {
    params: &'a TrainParams,
    input: SharedRows<T>,
    output: SharedRows<T>,
    negatives: AliasTable,
    processed: AtomicUsize,
    total_tokens: usize,
}

impl<T: Scalar> Trainer<'_, T> {
    fn learning_rate(&self) -> T {
        let done = self.processed.load(Ordering::Relaxed) as f64 / self.total_tokens as f64;
        let lr0 = self.params.initial_learning_rate;
        let lr = (lr0 * (1.0 - done)).max(lr0 * self.params.min_learning_rate_fraction);
        T::lit(lr)
    }

    /// Train on every walk whose index is `offset (mod stride)`.
    fn run(&self, walks: &[Vec<u32>], offset: usize, stride: usize, rng: &mut ChaCha8Rng) {
        let dims = self.params.dimensions;
        let mut center_vec = vec![T::zero(); dims];
        let mut target_vec = vec![T::zero(); dims];
        let mut center_grad = vec![T::zero(); dims];
        let window = self.params.window;

        for _ in 0..self.params.epochs {
            for walk in walks.iter().skip(offset).step_by(stride) {
                for (pos, &center) in walk.iter().enumerate() {
                    let lr = self.learning_rate();
                    let lo = pos.saturating_sub(window);
                    let hi = (pos + window).min(walk.len() - 1);
                    for (ctx_pos, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                        if ctx_pos == pos {
                            continue;
                        }
                        let context = context as usize;
                        self.input.read(center as usize, &mut center_vec);
                        center_grad.iter_mut().for_each(|g| *g = T::zero());
                        self.update(context, T::one(), lr, &center_vec, &mut target_vec, &mut center_grad);
                        for _ in 0..self.params.negative_samples {
                            let neg = self.negatives.sample(rng);
                            if neg == context {
                                continue;
                            }
                            self.update(neg, T::zero(), lr, &center_vec, &mut target_vec, &mut center_grad);
                        }
                        self.input.add_scaled(center as usize, T::one(), &center_grad);
                    }
                    self.processed.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
    }

    #[inline]
    fn update(
        &self,
        target: usize,
        label: T,
        lr: T,
        center_vec: &[T],
        target_vec: &mut [T],
        center_grad: &mut [T],
    ) {
        self.output.read(target, target_vec);
        let g = (label - sigmoid(dot(center_vec, target_vec))) * lr;
        for (cg, &t) in center_grad.iter_mut().zip(target_vec.iter()) {
            *cg += g * t;
        }
        self.output.add_scaled(target, g, center_vec);
    }
}

/// Skip-gram with negative sampling over the walks.
///
/// Every (center, context) pair within `window` positions is a positive
/// example; negatives are drawn from walk occurrence counts raised to the
/// 3/4 power. The learning rate decays linearly with processed tokens down to
/// a floor. Only the input vectors are returned.
pub fn train_sgns<T: Scalar>(
    walks: &WalkSet,
    params: &TrainParams,
) -> Result<EmbeddingMatrix<T>, EmbeddingError> {
    params.validate()?;
    if walks.walks.is_empty() || walks.nodes.is_empty() {
        return Err(EmbeddingError::EmptyWalks);
    }
    let counts = walks.occurrences();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(EmbeddingError::NodeNotVisited(walks.nodes[missing].clone()));
    }
    let n = walks.nodes.len();
    let dims = params.dimensions;

    let noise: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let negatives = AliasTable::new(&noise).expect("every node has a positive count");

    let mut init_rng = ChaCha8Rng::seed_from_u64(params.seed);
    let half_width = 0.5 / dims as f64;
    let input = SharedRows::new(
        (0..n * dims).map(|_| T::lit(init_rng.random_range(-half_width..half_width))),
        dims,
    );
    let output = SharedRows::new(std::iter::repeat_n(T::zero(), n * dims), dims);

    let trainer = Trainer {
        params,
        input,
        output,
        negatives,
        processed: AtomicUsize::new(0),
        total_tokens: walks.token_count() * params.epochs,
    };

    match params.mode {
        TrainMode::Deterministic => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(1);
            trainer.run(&walks.walks, 0, 1, &mut rng);
        }
        TrainMode::Concurrent { threads } => {
            std::thread::scope(|scope| {
                for t in 0..threads {
                    let trainer = &trainer;
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                        rng.set_stream(1 + t as u64);
                        trainer.run(&walks.walks, t, threads, &mut rng);
                    });
                }
            });
        }
    }

    let data = trainer.input.into_values();
    EmbeddingMatrix::new(walks.level, walks.nodes.clone(), dims, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discipline_graph::DisciplineGraph;
    use crate::embedding::{generate_walks, WalkParams};

    fn topic(i: usize) -> TopicId {
        TopicId::new(Level::Macro, &i.to_string()).unwrap()
    }

    fn small_params() -> TrainParams {
        TrainParams {
            dimensions: 8,
            epochs: 2,
            ..TrainParams::default()
        }
    }

    fn ring_walks() -> WalkSet {
        let g = DisciplineGraph::from_edges(
            Level::Macro,
            [],
            (0..6).map(|i| (topic(i), topic((i + 1) % 6), 1)),
        )
        .unwrap();
        let p = WalkParams {
            walk_length: 20,
            walks_per_node: 4,
            ..WalkParams::default()
        };
        generate_walks(&g, &p).unwrap()
    }

    #[test]
    fn output_shape_and_determinism() {
        let walks = ring_walks();
        let p = TrainParams {
            dimensions: 64,
            ..small_params()
        };
        let a: EmbeddingMatrix<f64> = train_sgns(&walks, &p).unwrap();
        assert_eq!(a.len(), 6);
        for i in 0..a.len() {
            assert_eq!(a.vector(i).len(), 64);
            assert!(a.vector(i).iter().all(|v| v.is_finite()));
            assert!(a.vector(i).iter().any(|&v| v != 0.0));
        }
        let b: EmbeddingMatrix<f64> = train_sgns(&walks, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_precision_training() {
        let m: EmbeddingMatrix<f32> = train_sgns(&ring_walks(), &small_params()).unwrap();
        assert!(m.data.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn concurrent_mode_produces_finite_vectors() {
        let p = TrainParams {
            mode: TrainMode::Concurrent { threads: 3 },
            ..small_params()
        };
        let m: EmbeddingMatrix<f64> = train_sgns(&ring_walks(), &p).unwrap();
        assert!(m.data.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn single_node_degenerates_gracefully() {
        let walks = WalkSet {
            level: Level::Macro,
            nodes: vec![topic(1)],
            walks: vec![vec![0]; 10],
        };
        let m: EmbeddingMatrix<f64> = train_sgns(&walks, &small_params()).unwrap();
        assert!(m.vector(0).iter().all(|v| v.is_finite()));
        assert!(m.vector(0).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn unvisited_node_is_an_error() {
        let walks = WalkSet {
            level: Level::Macro,
            nodes: vec![topic(1), topic(2)],
            walks: vec![vec![0, 0]],
        };
        assert!(matches!(
            train_sgns::<f64>(&walks, &small_params()),
            Err(EmbeddingError::NodeNotVisited(t)) if t == topic(2)
        ));
    }

    #[test]
    fn invalid_params() {
        let walks = ring_walks();
        for p in [
            TrainParams { dimensions: 0, ..small_params() },
            TrainParams { window: 0, ..small_params() },
            TrainParams { negative_samples: 0, ..small_params() },
            TrainParams { initial_learning_rate: 0.0, ..small_params() },
            TrainParams { mode: TrainMode::Concurrent { threads: 0 }, ..small_params() },
        ] {
            assert!(matches!(
                train_sgns::<f64>(&walks, &p),
                Err(EmbeddingError::InvalidParams(_))
            ));
        }
    }
}
