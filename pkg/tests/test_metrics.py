import numpy as np
import pytest

from rtmot.core import BoundingBox
from rtmot.errors import EmptyGroundTruth
from rtmot.metrics import REPORT_COLUMNS, GroundTruthTrack, MetricsReport, evaluate, fragmentations, match_frame


def box_at_iou(base: BoundingBox, target: float) -> BoundingBox:
    # horizontal shift s of a same-size box gives IoU (w - s) / (w + s)
    s = base.w * (1 - target) / (1 + target)
    return base._replace(x=base.x + s)


def perfect(gt):
    return [(f, t.gt_id, b) for t in gt for f, b in t.boxes.items()]


def scene(n_objects=4, n_frames=20, seed=0):
    rng = np.random.default_rng(seed)
    gt = []
    for k in range(1, n_objects + 1):
        x, y = rng.uniform(0, 1000, 2)
        t = GroundTruthTrack(k)
        for f in range(1, n_frames + 1):
            t.add(f, BoundingBox(x + 2 * f, y, 40, 80))
        gt.append(t)
    return gt


def test_box_at_iou_helper():
    from rtmot.core import iou
    b = BoundingBox(0, 0, 10, 10)
    assert iou(b, box_at_iou(b, 0.6)) == pytest.approx(0.6)


def test_single_identical():
    b = BoundingBox(0, 0, 10, 10)
    acc = match_frame({}, [(1, b)], [(1, b)])
    assert acc.matches == [(1, 1, 1.0)]
    assert (acc.fp_t, acc.fn_t, acc.id_sw_t) == (0, 0, 0)


def test_persistence_beats_better_overlap():
    a = BoundingBox(0, 0, 40, 80)
    acc = match_frame({"A": 1}, [("A", a)], [(1, box_at_iou(a, 0.6)), (2, box_at_iou(a, 0.9))])
    assert acc.correspondence == {"A": 1}
    assert acc.fp_t == 1 and acc.id_sw_t == 0


def test_identity_switch():
    a = BoundingBox(0, 0, 40, 80)
    first = match_frame({}, [("A", a)], [(1, a)])
    second = match_frame(first.correspondence, [("A", a)], [(2, a)])
    assert second.id_sw_t == 1


def test_switch_after_gap_uses_last_match():
    gt = [GroundTruthTrack(1, {1: BoundingBox(0, 0, 10, 10), 2: BoundingBox(0, 0, 10, 10),
                               3: BoundingBox(0, 0, 10, 10)})]
    hyp = [(1, 5, BoundingBox(0, 0, 10, 10)), (3, 5, BoundingBox(0, 0, 10, 10))]
    r = evaluate(gt, hyp)
    assert (r.IDs, r.FN, r.FM) == (0, 1, 1)
    r = evaluate(gt, [(1, 5, BoundingBox(0, 0, 10, 10)), (3, 6, BoundingBox(0, 0, 10, 10))])
    assert r.IDs == 1


def test_perfect_tracker():
    gt = scene()
    r = evaluate(gt, perfect(gt))
    assert r.MOTA == 100.0 and r.MOTP == 100.0
    assert (r.FP, r.FN, r.IDs, r.FM, r.ML) == (0, 0, 0, 0, 0)
    assert r.MT == r.GT == 4


def test_eighty_percent_frame():
    gt = [GroundTruthTrack(k, {1: BoundingBox(100 * k, 0, 50, 50)}) for k in range(1, 11)]
    hyp = [(1, k, BoundingBox(100 * k, 0, 50, 50)) for k in range(1, 10)]
    hyp.append((1, 99, BoundingBox(5000, 5000, 10, 10)))
    r = evaluate(gt, hyp)
    assert r.MOTA == pytest.approx(80.0, abs=1e-12)
    assert r.row()[REPORT_COLUMNS.index("MOTA")] == "80.0"
    assert r.Rcll == pytest.approx(90.0) and r.Prcn == pytest.approx(90.0)


def test_fragmentation_and_mostly_tracked():
    b = BoundingBox(0, 0, 10, 10)
    gt = [GroundTruthTrack(1, {f: b for f in range(1, 11)})]
    hyp = [(f, 1, b) for f in range(1, 11) if f != 3]
    r = evaluate(gt, hyp)
    assert r.FM == 1 and r.MT == 1 and r.IDs == 0


def test_fragmentations_counter():
    assert fragmentations([False, True, False, True, True, False]) == 1
    assert fragmentations([True, False, False, True, False, True]) == 2
    assert fragmentations([False, False, True]) == 0


def test_relabel_invariance():
    gt = scene(6, 30, seed=1)
    rng = np.random.default_rng(3)
    hyp = []
    for f, gid, b in perfect(gt):
        if rng.uniform() < 0.15:
            continue
        # noisy boxes and one deliberate swap so IDs and FP are non-trivial
        hid = gid if not (f > 15 and gid in (1, 2)) else 3 - gid
        hyp.append((f, hid, b._replace(x=b.x + rng.normal(0, 6))))
    hyp += [(f, 50, BoundingBox(3000, 3000, 10, 10)) for f in range(1, 31, 4)]
    base = evaluate(gt, hyp).MOTA
    ids = sorted({h for _, h, _ in hyp})
    for _ in range(100):
        perm = dict(zip(ids, rng.permutation(1000)[: len(ids)] + 1))
        assert evaluate(gt, [(f, perm[h], b) for f, h, b in hyp]).MOTA == base


def test_extra_false_positive():
    gt = scene()
    hyp = perfect(gt)
    before = evaluate(gt, hyp)
    after = evaluate(gt, hyp + [(5, 999, BoundingBox(5000, 5000, 20, 20))])
    assert before.MOTA - after.MOTA == pytest.approx(100.0 / before.n_gt_boxes, abs=1e-12)
    assert after.MOTP == before.MOTP


def test_accounting_identities():
    gt = scene(5, 25, seed=4)
    rng = np.random.default_rng(9)
    hyp = [(f, int(rng.integers(1, 9)), b._replace(x=b.x + rng.normal(0, 10)))
           for f, _, b in perfect(gt) if rng.uniform() > 0.2]
    r = evaluate(gt, hyp)
    assert r.n_matches + r.FN == r.n_gt_boxes
    assert r.n_matches + r.FP == r.n_hyp_boxes == len(hyp)
    assert r.MT + r.PT + r.ML == r.GT
    assert 0 <= r.MOTP <= 100 and r.MOTA <= 100


def test_motp_is_mean_overlap():
    a = BoundingBox(0, 0, 40, 80)
    gt = [GroundTruthTrack(1, {1: a, 2: a})]
    hyp = [(1, 1, box_at_iou(a, 0.6)), (2, 1, box_at_iou(a, 0.8))]
    assert evaluate(gt, hyp).MOTP == pytest.approx(70.0)


def test_empty_ground_truth():
    with pytest.raises(EmptyGroundTruth):
        evaluate([], [(1, 1, BoundingBox(0, 0, 1, 1))])
    with pytest.raises(EmptyGroundTruth):
        MetricsReport().MOTA


def test_half_up_rounding():
    assert MetricsReport(n_gt_boxes=1, n_matches=1, overlap_sum=0.8125).row()[-1] == "81.3"
    r = MetricsReport(n_gt_boxes=200, n_matches=1, FN=199)
    assert r.row()[REPORT_COLUMNS.index("Rcll")] == "0.5"


def test_combine_pools_counts():
    gt = scene()
    a = evaluate(gt, perfect(gt))
    b = evaluate(gt, perfect(gt)[5:])
    c = MetricsReport.combine([a, b])
    assert c.n_gt_boxes == a.n_gt_boxes + b.n_gt_boxes
    assert c.FN == b.FN and c.GT == 8
