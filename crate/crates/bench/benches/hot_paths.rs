use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use cirl_core::control::PidGainSet;
use cirl_core::optimize::rollout;
use cirl_core::policy::{AgentKind, MlpLayout, PolicyParams, StaticPid};
use cirl_core::scenarios::test_scenario;
use cirl_core::sim::{integrate_step, Action, CstrParams, EnvConfig, FullState, CONTROL_DT};

fn params(layout: MlpLayout, kind: AgentKind) -> PolicyParams {
    // Deterministic, roughly unit-scale weights without pulling in an RNG.
    let n = layout.param_count();
    let v = (0..n).map(|i| ((i * 7919 % 2003) as f64 / 1001.5) - 1.0).collect();
    PolicyParams::new(kind, layout, v).unwrap()
}

fn rk4(c: &mut Criterion) {
    let p = CstrParams::default();
    let s = FullState::new(0.4, 0.5, 0.05, 365.0, 100.0);
    let u = Action::new(360.0, 100.0);
    c.bench_function("rk4_control_step", |b| {
        b.iter(|| integrate_step(black_box(&s), black_box(&u), CONTROL_DT, 10, &p, 1.0).unwrap())
    });
}

fn mlp(c: &mut Criterion) {
    let x = [0.3; 12];
    let cirl = params(MlpLayout::cirl(), AgentKind::Cirl);
    let rl = params(MlpLayout::pure_rl(), AgentKind::PureRl);
    c.bench_function("mlp_forward_cirl", |b| b.iter(|| cirl.forward(black_box(&x)).unwrap()));
    c.bench_function("mlp_forward_pure_rl", |b| b.iter(|| rl.forward(black_box(&x)).unwrap()));
}

fn episodes(c: &mut Criterion) {
    let s = test_scenario();
    let cfg = EnvConfig::default();
    let pid = StaticPid {
        gains: PidGainSet::REFERENCE,
    };
    let cirl = params(MlpLayout::cirl(), AgentKind::Cirl);
    let mut g = c.benchmark_group("episode");
    g.sample_size(20);
    g.bench_function("static_pid", |b| {
        b.iter(|| rollout(&pid, &s, &cfg, black_box(3)).unwrap())
    });
    g.bench_function("cirl", |b| b.iter(|| rollout(&cirl, &s, &cfg, black_box(3)).unwrap()));
    g.finish();
}

criterion_group!(benches, rk4, mlp, episodes);
criterion_main!(benches);
