use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};
use evtrail::{anchor_batch, build_tree, verify_anchored_record, BatchId, HashFunctionId, SignatureSchemeId};
use evtrail_bench::{key, records};

const H: HashFunctionId = HashFunctionId::Sha256;

fn anchoring(c: &mut Criterion) {
    let recs = records(4096);
    let kq = key(SignatureSchemeId::MlDsa65);
    let id = BatchId::sequential(0);

    let mut g = c.benchmark_group("merkle");
    g.throughput(Throughput::Elements(recs.len() as u64));
    g.bench_function("build 4096", |b| b.iter(|| build_tree(black_box(&recs), H).unwrap()));
    g.bench_function("anchor 4096", |b| {
        b.iter(|| anchor_batch(black_box(&recs), &kq, id, 0, H).unwrap())
    });
    g.finish();

    let (anchor, tree) = anchor_batch(&recs, &kq, id, 0, H).unwrap();
    let proof = tree.prove_inclusion(id, 1234).unwrap();
    c.bench_function("merkle/prove", |b| {
        b.iter(|| tree.prove_inclusion(id, black_box(1234)).unwrap())
    });
    c.bench_function("merkle/verify anchored record", |b| {
        b.iter(|| verify_anchored_record(black_box(&recs[1234]), &proof, &anchor, kq.public_key(), H))
    });
}

criterion_group!(benches, anchoring);
criterion_main!(benches);
