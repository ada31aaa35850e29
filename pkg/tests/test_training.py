import math

import numpy as np
import pytest

from schedlab.datasets import BlobSpec, make_blobs
from schedlab.mlp import MlpModel, init_theta, param_count
from schedlab.schedulers import SchedulerConfig, build_scheduler
from schedlab.training import (
    RunRecord,
    SgdState,
    evaluate,
    load_theta,
    save_theta,
    sgd_step,
    train_run,
    write_csv,
    write_run_csvs,
)


def small_task(per_class=30, seed=2, noise=1.0):
    spec = BlobSpec(classes=2, per_class=per_class, center_spread=4.0, noise=noise, seed=seed)
    return make_blobs(spec, "train"), make_blobs(spec, "test")


def scheduler_for(t_max, name="cosine", **kwargs):
    cfg = SchedulerConfig(base_lr=0.05, t_max=t_max, eta_min=1e-4,
                          window_n=min(10, t_max - 1), weight_w=0.05, warmup_steps=0)
    return build_scheduler(name, cfg, **kwargs)


# --- single update arithmetic --------------------------------------------------

def test_sgd_step_hand_example():
    theta = np.array([1.0])
    velocity = np.array([0.5])
    grad = np.array([1.0])
    new_theta, new_v = sgd_step(theta, velocity, grad, lr=0.1, momentum=0.9, weight_decay=0.0)
    # v' = 0.9 * 0.5 + 1.0 = 1.45; theta' = 1.0 - 0.1 * 1.45
    assert np.allclose(new_v, [1.45], rtol=1e-15)
    assert np.allclose(new_theta, [0.855], rtol=1e-15)


def test_sgd_step_weight_decay_only():
    theta = np.array([2.0, -2.0])
    v = np.zeros(2)
    for _ in range(5):
        theta, v = sgd_step(theta, v, np.zeros(2), lr=0.1, momentum=0.0, weight_decay=0.5)
    # pure decay: theta scales by (1 - lr * wd) each step
    assert np.allclose(theta, [2.0 * 0.95**5, -2.0 * 0.95**5], rtol=1e-14)


def test_sgd_step_zero_lr_freezes_theta():
    theta = np.array([1.0, 2.0])
    v = np.array([0.3, -0.3])
    new_theta, new_v = sgd_step(theta, v, np.array([5.0, 5.0]), lr=0.0,
                                momentum=0.9, weight_decay=1e-4)
    assert np.array_equal(new_theta, theta)
    assert not np.array_equal(new_v, v)  # velocity still accumulates


def test_sgd_state_validation():
    with pytest.raises(ValueError):
        SgdState(np.zeros(1), momentum=1.0)
    with pytest.raises(ValueError):
        SgdState(np.zeros(1), momentum=-0.1)
    with pytest.raises(ValueError):
        SgdState(np.zeros(1), weight_decay=-1e-4)


# --- full runs ------------------------------------------------------------------

def test_train_run_row_shapes():
    train, test = small_task()
    epochs, batch = 3, 16
    spe = -(-train.n // batch)
    rec = train_run(train, test, (2, 8, 2), scheduler_for(epochs * spe),
                    epochs=epochs, batch_size=batch, seed=0)
    assert not rec.diverged
    assert len(rec.steps) == epochs * spe
    assert len(rec.epochs) == epochs
    assert [row[0] for row in rec.steps] == list(range(1, epochs * spe + 1))
    assert [row[0] for row in rec.epochs] == [0, 1, 2]
    for row in rec.steps:
        assert 0.0 <= row[4] <= 1.0
        assert row[2] > 0.0


def test_train_run_keeps_partial_batch():
    train, test = small_task(per_class=17)  # 34 points, batch 10 -> 4 batches
    rec = train_run(train, test, (2, 4, 2), scheduler_for(8),
                    epochs=2, batch_size=10, seed=0)
    assert len(rec.steps) == 8


def test_train_run_determinism():
    train, test = small_task()
    spe = -(-train.n // 16)

    def run():
        return train_run(train, test, (2, 8, 2), scheduler_for(2 * spe),
                         epochs=2, batch_size=16, seed=42)

    a, b = run(), run()
    assert a.steps == b.steps
    assert a.epochs == b.epochs
    assert np.array_equal(a.final_theta, b.final_theta)


def test_train_run_seed_isolation():
    # equal seeds give equal inits regardless of scheduler choice
    train, test = small_task()
    spe = -(-train.n // 16)
    rec_a = train_run(train, test, (2, 8, 2), scheduler_for(2 * spe, "cosine"),
                      epochs=2, batch_size=16, seed=7)
    rec_b = train_run(train, test, (2, 8, 2), scheduler_for(2 * spe, "volsched"),
                      epochs=2, batch_size=16, seed=7)
    assert np.array_equal(rec_a.initial_theta, rec_b.initial_theta)


def test_train_run_works_with_every_scheduler():
    train, test = small_task()
    spe = -(-train.n // 16)
    for name in ("volsched", "cosine", "exponential", "plateau"):
        rec = train_run(train, test, (2, 8, 2), scheduler_for(2 * spe, name),
                        epochs=2, batch_size=16, seed=1, label=name)
        assert rec.scheduler == name
        assert not rec.diverged
        assert 0.0 <= rec.final_test_acc <= 1.0


def test_train_run_learns_separable_blobs():
    spec = BlobSpec(classes=2, per_class=60, center_spread=6.0, noise=0.3, seed=5)
    train = make_blobs(spec, "train")
    test = make_blobs(spec, "test")
    spe = -(-train.n // 16)
    rec = train_run(train, test, (2, 8, 2), scheduler_for(10 * spe),
                    epochs=10, batch_size=16, seed=0)
    assert rec.final_test_acc > 0.95


def test_train_run_divergence_flags_and_halts():
    train, test = small_task()
    spe = -(-train.n // 16)
    cfg = SchedulerConfig(base_lr=1e4, t_max=5 * spe, eta_min=0.0,
                          window_n=4, weight_w=0.0, warmup_steps=0)
    rec = train_run(train, test, (2, 8, 2), build_scheduler("cosine", cfg),
                    epochs=5, batch_size=16, seed=0)
    assert rec.diverged
    assert len(rec.steps) < 5 * spe
    last = rec.steps[-1]
    assert math.isnan(last[2])
    assert len(rec.epochs) < 5  # evaluation stops with the halt
    assert math.isnan(rec.max_lr) or rec.max_lr > 0.0


def test_train_run_rejects_bad_args():
    train, test = small_task()
    with pytest.raises(ValueError):
        train_run(train, test, (2, 4, 2), scheduler_for(10), epochs=0, batch_size=4)
    with pytest.raises(ValueError):
        train_run(train, test, (2, 4, 2), scheduler_for(10), epochs=1, batch_size=0)


def test_evaluate_matches_loss_grad_path():
    train, _ = small_task()
    model = MlpModel((2, 4, 2), init_theta((2, 4, 2), 3))
    loss, acc = evaluate(model, train)
    from schedlab.mlp import loss_grad_accuracy
    ref_loss, _, ref_acc = loss_grad_accuracy(model, train.inputs, train.labels)
    assert math.isclose(loss, ref_loss, rel_tol=1e-12)
    assert acc == ref_acc


def test_record_properties_on_empty_record():
    rec = RunRecord(scheduler="cosine", seed=0)
    assert math.isnan(rec.final_test_acc)
    assert math.isnan(rec.max_lr)


# --- serialization ---------------------------------------------------------------

def test_theta_round_trip(tmp_path):
    theta = init_theta((2, 32, 32, 8), 42)
    path = tmp_path / "model.bin"
    save_theta(path, theta)
    back = load_theta(path)
    assert np.array_equal(back, theta)
    assert path.stat().st_size == 8 + 8 * param_count((2, 32, 32, 8))


def test_load_theta_rejects_truncation(tmp_path):
    theta = np.arange(4.0)
    path = tmp_path / "model.bin"
    save_theta(path, theta)
    data = path.read_bytes()
    clipped = tmp_path / "clipped.bin"
    clipped.write_bytes(data[:-3])
    with pytest.raises(ValueError):
        load_theta(clipped)
    padded = tmp_path / "padded.bin"
    padded.write_bytes(data + b"\x00")
    with pytest.raises(ValueError):
        load_theta(padded)
    stub = tmp_path / "stub.bin"
    stub.write_bytes(data[:5])
    with pytest.raises(ValueError):
        load_theta(stub)


def test_write_csv_cell_formats(tmp_path):
    path = tmp_path / "cells.csv"
    write_csv(path, ("a", "b", "c", "d", "e"),
              [(1, 0.1, True, None, "volsched"), (2, float("nan"), False, None, "x")])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "a,b,c,d,e"
    assert lines[1] == "1,0.1,true,,volsched"
    assert lines[2] == "2,nan,false,,x"


def test_write_run_csvs(tmp_path):
    train, test = small_task()
    spe = -(-train.n // 16)
    rec = train_run(train, test, (2, 4, 2), scheduler_for(spe),
                    epochs=1, batch_size=16, seed=0)
    steps_path = tmp_path / "steps.csv"
    epochs_path = tmp_path / "epochs.csv"
    write_run_csvs(rec, steps_path, epochs_path)
    steps_lines = steps_path.read_text(encoding="utf-8").splitlines()
    assert steps_lines[0] == "step,epoch,lr,train_loss,train_acc"
    assert len(steps_lines) == 1 + len(rec.steps)
    first = steps_lines[1].split(",")
    assert first[0] == "1" and first[1] == "0"
    assert float(first[2]) == rec.steps[0][2]
    epochs_lines = epochs_path.read_text(encoding="utf-8").splitlines()
    assert epochs_lines[0] == "epoch,test_acc,test_loss"
    assert len(epochs_lines) == 1 + len(rec.epochs)
