//! Binary training checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic  b"RQNCKPT\0"
//! u32    version
//! hyperparameters, episode counter (u64), epsilon (f64)
//! ChaCha8 state: seed [u8; 32], stream u64, word position u128
//! reward log: n, source rewards, relay rewards (flag byte + f64)
//! source agent, relay agent: main net, target net, Adam (step, m, v), replay buffer
//! ```
//!
//! A network is stored as its layer count followed by, per layer,
//! `fan_in`, `fan_out`, row-major weights and the bias vector. The file
//! holds everything the trainer mutates, so a resumed run is bit-identical
//! to an uninterrupted one. The environment is not stored; pass the same
//! configuration when loading.

use std::path::Path;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::agent::{AgentState, DualTrainer, Hyperparams, RewardLog};
use super::mlp::{Dense, QNetwork};
use super::replay::{ReplayBuffer, Transition};
use crate::env::{Observation, RelayEnv, OBS_DIM};
use crate::error::DqnError;

const MAGIC: &[u8; 8] = b"RQNCKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    fn hyper(&mut self, h: &Hyperparams) {
        self.u64(h.episodes);
        self.u64(h.target_sync_period);
        for v in [h.discount, h.learning_rate, h.epsilon_start, h.epsilon_decay, h.epsilon_floor] {
            self.f64(v);
        }
        self.usize(h.buffer_capacity);
        self.usize(h.batch_size);
        self.usize(h.hidden_layers.len());
        for &w in &h.hidden_layers {
            self.usize(w);
        }
        for v in [h.adam_beta1, h.adam_beta2, h.adam_epsilon] {
            self.f64(v);
        }
    }

    fn net(&mut self, net: &QNetwork) {
        self.usize(net.layers.len());
        for l in &net.layers {
            self.usize(l.fan_in());
            self.usize(l.fan_out());
            for &w in l.weights.iter() {
                self.f64(w);
            }
            for &b in l.bias.iter() {
                self.f64(b);
            }
        }
    }

    fn obs(&mut self, o: &Observation) {
        for &v in &o.0 {
            self.f64(v);
        }
    }

    fn agent(&mut self, a: &AgentState) {
        self.net(&a.main);
        self.net(&a.target);
        self.u64(a.adam.step);
        self.net(&a.adam.first);
        self.net(&a.adam.second);
        let b = &a.buffer;
        self.usize(b.capacity());
        self.usize(b.next_slot());
        self.u64(b.inserted());
        self.usize(b.len());
        for t in b.iter() {
            self.obs(&t.state);
            self.usize(t.action);
            self.f64(t.reward);
            match &t.next_state {
                Some(o) => {
                    self.u8(1);
                    self.obs(o);
                }
                None => self.u8(0),
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(what: &str) -> DqnError {
    DqnError::Checkpoint(format!("truncated or corrupt checkpoint ({what})"))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DqnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| corrupt("unexpected end"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, DqnError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, DqnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, DqnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn u128(&mut self) -> Result<u128, DqnError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().expect("16 bytes")))
    }
    fn f64(&mut self) -> Result<f64, DqnError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    /// Length-like field, bounded by the bytes left so corrupt input cannot
    /// trigger huge allocations.
    fn len(&mut self, what: &str) -> Result<usize, DqnError> {
        let v = self.u64()?;
        if v > (self.buf.len() - self.pos) as u64 + 1_000_000 {
            return Err(corrupt(what));
        }
        Ok(v as usize)
    }

    fn hyper(&mut self) -> Result<Hyperparams, DqnError> {
        let episodes = self.u64()?;
        let target_sync_period = self.u64()?;
        let discount = self.f64()?;
        let learning_rate = self.f64()?;
        let epsilon_start = self.f64()?;
        let epsilon_decay = self.f64()?;
        let epsilon_floor = self.f64()?;
        let buffer_capacity = self.len("buffer capacity")?;
        let batch_size = self.len("batch size")?;
        let n = self.len("hidden layers")?;
        let hidden_layers = (0..n).map(|_| self.len("layer width")).collect::<Result<_, _>>()?;
        Ok(Hyperparams {
            episodes,
            target_sync_period,
            discount,
            learning_rate,
            epsilon_start,
            epsilon_decay,
            epsilon_floor,
            buffer_capacity,
            batch_size,
            hidden_layers,
            adam_beta1: self.f64()?,
            adam_beta2: self.f64()?,
            adam_epsilon: self.f64()?,
        })
    }

    fn net(&mut self) -> Result<QNetwork, DqnError> {
        let n = self.len("layer count")?;
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let fan_in = self.len("fan in")?;
            let fan_out = self.len("fan out")?;
            let count = fan_in.checked_mul(fan_out).ok_or_else(|| corrupt("layer shape"))?;
            if count * 8 > self.buf.len() - self.pos {
                return Err(corrupt("layer shape"));
            }
            let w: Vec<f64> = (0..count).map(|_| self.f64()).collect::<Result<_, _>>()?;
            let b: Vec<f64> = (0..fan_out).map(|_| self.f64()).collect::<Result<_, _>>()?;
            layers.push(Dense {
                weights: Array2::from_shape_vec((fan_in, fan_out), w).map_err(|_| corrupt("layer shape"))?,
                bias: Array1::from(b),
            });
        }
        Ok(QNetwork { layers })
    }

    fn obs(&mut self) -> Result<Observation, DqnError> {
        let mut o = [0.0; OBS_DIM];
        for v in &mut o {
            *v = self.f64()?;
        }
        Ok(Observation(o))
    }

    fn agent(&mut self) -> Result<AgentState, DqnError> {
        let main = self.net()?;
        let target = self.net()?;
        let step = self.u64()?;
        let first = self.net()?;
        let second = self.net()?;
        let capacity = self.len("buffer capacity")?;
        let next = self.len("buffer cursor")?;
        let inserted = self.u64()?;
        let len = self.len("buffer length")?;
        if capacity == 0 || len > capacity || next >= capacity {
            return Err(corrupt("replay buffer header"));
        }
        let mut items = Vec::with_capacity(len);
        for _ in 0..len {
            let state = self.obs()?;
            let action = self.len("action")?;
            let reward = self.f64()?;
            let next_state = match self.u8()? {
                0 => None,
                1 => Some(self.obs()?),
                _ => return Err(corrupt("terminal flag")),
            };
            items.push(Transition { state, action, reward, next_state });
        }
        if main.sizes() != target.sizes() || main.sizes() != first.sizes() || main.sizes() != second.sizes() {
            return Err(corrupt("network shapes disagree"));
        }
        Ok(AgentState {
            main,
            target,
            adam: AdamState { first, second, step },
            buffer: ReplayBuffer::from_parts(items, capacity, next, inserted),
        })
    }
}

pub fn encode_checkpoint(trainer: &DualTrainer) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(MAGIC);
    w.u32(CHECKPOINT_VERSION);
    w.hyper(&trainer.hyper);
    w.u64(trainer.episode);
    w.f64(trainer.epsilon);
    w.0.extend_from_slice(&trainer.rng.get_seed());
    w.u64(trainer.rng.get_stream());
    w.u128(trainer.rng.get_word_pos());
    w.usize(trainer.log.source.len());
    for (s, r) in trainer.log.source.iter().zip(&trainer.log.relay) {
        w.f64(*s);
        match r {
            Some(v) => {
                w.u8(1);
                w.f64(*v);
            }
            None => w.u8(0),
        }
    }
    w.agent(&trainer.source);
    w.agent(&trainer.relay);
    w.0
}

pub fn decode_checkpoint(bytes: &[u8], env: RelayEnv) -> Result<DualTrainer, DqnError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(DqnError::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(DqnError::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let hyper = r.hyper()?;
    hyper.validate()?;
    let episode = r.u64()?;
    let epsilon = r.f64()?;
    let seed: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(r.u64()?);
    rng.set_word_pos(r.u128()?);
    let n = r.len("reward log")?;
    let mut log = RewardLog::default();
    for _ in 0..n {
        log.source.push(r.f64()?);
        log.relay.push(match r.u8()? {
            0 => None,
            1 => Some(r.f64()?),
            _ => return Err(corrupt("reward flag")),
        });
    }
    let source = r.agent()?;
    let relay = r.agent()?;
    if r.pos != bytes.len() {
        return Err(corrupt("trailing bytes"));
    }
    let expected = hyper.layer_sizes(env.num_actions());
    if source.main.sizes() != expected || relay.main.sizes() != expected {
        return Err(DqnError::Checkpoint(format!(
            "network shape {:?} does not match the environment ({expected:?})",
            source.main.sizes()
        )));
    }
    Ok(DualTrainer { env, hyper, source, relay, epsilon, episode, rng, log })
}

pub fn save_checkpoint(trainer: &DualTrainer, path: &Path) -> Result<(), DqnError> {
    std::fs::write(path, encode_checkpoint(trainer))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path, env: RelayEnv) -> Result<DualTrainer, DqnError> {
    decode_checkpoint(&std::fs::read(path)?, env)
}
