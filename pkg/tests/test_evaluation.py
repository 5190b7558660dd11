import math

import numpy as np
import pytest

import oracles
from contourledger import BinaryMask, BoxRect, FourierDescriptor, PolygonShape, polygon_area
from contourledger.evaluation import (
    ROUTE_BOX,
    ROUTE_CONTOUR,
    ROUTE_FOURIER,
    ROUTE_MASK,
    GroundTruth,
    Prediction,
    average_precision,
    convert_route,
    evaluate,
    greedy_match,
    matched_tp_metrics,
    micro_average,
)


def square_ring(x1, y1, x2, y2):
    return [[x1, y1], [x2, y1], [x2, y2], [x1, y2]]


def gt_square(image_id, cls, x1, y1, x2, y2):
    return GroundTruth(image_id, cls, PolygonShape.from_ring(square_ring(x1, y1, x2, y2)))


def pred_square(image_id, cls, conf, x1, y1, x2, y2):
    return Prediction(image_id, cls, conf, ROUTE_CONTOUR, square_ring(x1, y1, x2, y2))


class TestConvertRoute:
    def test_fourier_circle(self):
        r, t = 0.2, 256
        desc = FourierDescriptor(0.5, 0.5, np.array([[r, 0, 0, r]] + [[0] * 4] * 15))
        poly = convert_route(Prediction("i", 0, 0.9, ROUTE_FOURIER, desc))
        assert len(poly.components[0].exterior) == t
        inscribed = (t / 2.0) * r * r * math.sin(2 * math.pi / t)
        assert polygon_area(poly) == pytest.approx(inscribed, abs=1e-12)
        assert abs(polygon_area(poly) - math.pi * r * r) < 3.0 * r * r / t ** 2 * (2 * math.pi ** 3 / 3)

    def test_box(self):
        poly = convert_route(Prediction("i", 0, 0.9, ROUTE_BOX, BoxRect(0, 0, 0.5, 0.5)))
        assert polygon_area(poly) == pytest.approx(0.25, abs=1e-12)

    def test_box_from_sequence(self):
        poly = convert_route(Prediction("i", 0, 0.9, ROUTE_BOX, [0.1, 0.1, 0.3, 0.4]))
        assert polygon_area(poly) == pytest.approx(0.06, abs=1e-12)

    def test_mask(self):
        data = np.zeros((8, 8), bool)
        data[2:6, 2:6] = True
        poly = convert_route(Prediction("i", 0, 0.9, ROUTE_MASK, BinaryMask(8, 8, data)))
        assert polygon_area(poly) == pytest.approx(16 / 64, abs=1e-12)

    def test_contour(self):
        poly = convert_route(pred_square("i", 0, 0.9, 0.1, 0.1, 0.4, 0.4))
        assert polygon_area(poly) == pytest.approx(0.09, abs=1e-12)

    def test_empty_mask_rejected(self):
        from contourledger import EmptyMask
        with pytest.raises(EmptyMask):
            convert_route(Prediction("i", 0, 0.9, ROUTE_MASK,
                                     BinaryMask(4, 4, np.zeros((4, 4), bool))))


class TestGreedyMatch:
    def test_single_tp(self):
        gts = [gt_square("i", 0, 0.2, 0.2, 0.6, 0.6)]
        preds = [pred_square("i", 0, 0.9, 0.2, 0.2, 0.6, 0.53)]  # IoU ~0.825... pick below
        preds = [pred_square("i", 0, 0.9, 0.2, 0.2, 0.6, 0.48)]
        ms = greedy_match(preds, gts, 0.5)
        assert len(ms.matches) == 1
        assert ms.matches[0][2] == pytest.approx(0.7, abs=1e-9)

    def test_threshold_cuts(self):
        gts = [gt_square("i", 0, 0.2, 0.2, 0.6, 0.6)]
        # IoU = 0.6: overlap 0.4x0.4x0.75
        preds = [pred_square("i", 0, 0.9, 0.2, 0.26, 0.6, 0.66)]
        iou = 0.85 / (2 - 0.85)
        ms_lo = greedy_match(preds, gts, 0.5)
        assert len(ms_lo.matches) == 1
        ms_hi = greedy_match(preds, gts, float(np.ceil(iou * 100) / 100) + 0.05)
        assert len(ms_hi.matches) == 0
        assert ms_hi.unmatched_preds == [0]
        assert ms_hi.unmatched_gts == [0]

    def test_confidence_priority(self):
        gts = [gt_square("i", 0, 0.2, 0.2, 0.6, 0.6)]
        hi = pred_square("i", 0, 0.9, 0.2, 0.2, 0.6, 0.52)   # IoU 0.8
        lo = pred_square("i", 0, 0.8, 0.2, 0.2, 0.6, 0.565)  # IoU ~0.9 but lower conf
        ms = greedy_match([hi, lo], gts, 0.5)
        assert ms.matches[0][0] == 0
        assert ms.unmatched_preds == [1]

    def test_class_respected(self):
        gts = [gt_square("i", 1, 0.2, 0.2, 0.6, 0.6)]
        preds = [pred_square("i", 0, 0.9, 0.2, 0.2, 0.6, 0.6)]
        ms = greedy_match(preds, gts, 0.5)
        assert not ms.matches

    def test_deterministic_with_equal_confidence(self):
        gts = [gt_square("i", 0, 0.2, 0.2, 0.6, 0.6),
               gt_square("i", 0, 0.7, 0.7, 0.9, 0.9)]
        preds = [pred_square("i", 0, 0.5, 0.2, 0.2, 0.6, 0.6),
                 pred_square("i", 0, 0.5, 0.7, 0.7, 0.9, 0.9)]
        results = [tuple(greedy_match(preds, gts, 0.5).matches) for _ in range(5)]
        assert all(r == results[0] for r in results)
        assert results[0][0][:2] == (0, 0) and results[0][1][:2] == (1, 1)


class TestAveragePrecision:
    def test_single_tp(self):
        assert average_precision([True], 1) == 1.0

    def test_tp_then_fp(self):
        assert average_precision([True, False], 1) == pytest.approx(1.0)

    def test_fp_then_tp(self):
        assert average_precision([False, True], 1) == pytest.approx(0.5)

    def test_matches_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            flags = rng.random(n) < 0.5
            n_gt = int(flags.sum() + rng.integers(0, 5)) or 1
            confs = np.sort(rng.random(n))[::-1]
            got = average_precision(list(flags), n_gt)
            want = oracles.ap_reference(
                [(c, i, bool(f)) for i, (c, f) in enumerate(zip(confs, flags))], n_gt)
            assert got == pytest.approx(want, abs=1e-12)

    def test_invariant_under_monotone_confidence_rescale(self):
        gts = [gt_square("i", 0, 0.1, 0.1, 0.3, 0.3),
               gt_square("i", 0, 0.5, 0.5, 0.8, 0.8)]
        preds = [pred_square("i", 0, 0.9, 0.1, 0.1, 0.3, 0.3),
                 pred_square("i", 0, 0.6, 0.5, 0.5, 0.8, 0.76),
                 pred_square("i", 0, 0.3, 0.0, 0.6, 0.2, 0.9)]
        r1 = evaluate(preds, gts, routes=[ROUTE_CONTOUR])
        squashed = [Prediction(p.image_id, p.class_id, p.confidence ** 3, p.route, p.payload)
                    for p in preds]
        r2 = evaluate(squashed, gts, routes=[ROUTE_CONTOUR])
        assert r1.routes[ROUTE_CONTOUR].map5095 == pytest.approx(
            r2.routes[ROUTE_CONTOUR].map5095, abs=1e-12)


class TestEvaluate:
    def test_perfect_predictions(self):
        gts = [gt_square("a", 0, 0.1, 0.1, 0.4, 0.4), gt_square("a", 1, 0.5, 0.5, 0.8, 0.8),
               gt_square("b", 0, 0.2, 0.2, 0.7, 0.7)]
        preds = [pred_square("a", 0, 0.9, 0.1, 0.1, 0.4, 0.4),
                 pred_square("a", 1, 0.8, 0.5, 0.5, 0.8, 0.8),
                 pred_square("b", 0, 0.95, 0.2, 0.2, 0.7, 0.7)]
        rep = evaluate(preds, gts, routes=[ROUTE_CONTOUR])
        rr = rep.routes[ROUTE_CONTOUR]
        assert rr.map50 == pytest.approx(1.0)
        assert rr.map5095 == pytest.approx(1.0)
        assert rr.quality_micro["b_f1"] == pytest.approx(1.0)
        assert rr.quality_micro["chamfer"] == pytest.approx(0.0, abs=1e-12)

    def test_marginal_iou_band(self):
        # IoU in (0.50, 0.55): counts at the 0.50 threshold only;
        # squares of side s shifted by d have IoU (s - d)/(s + d)
        gts = [gt_square("a", 0, 0.2, 0.2, 0.6, 0.6)]
        preds = [pred_square("a", 0, 0.9, 0.2, 0.3264, 0.6, 0.7264)]
        rep = evaluate(preds, gts, routes=[ROUTE_CONTOUR]).routes[ROUTE_CONTOUR]
        assert rep.map50 == pytest.approx(1.0)
        assert rep.map5095 == pytest.approx(0.1)

    def test_no_predictions(self):
        gts = [gt_square("a", 0, 0.2, 0.2, 0.6, 0.6)]
        rep = evaluate([], gts, routes=[ROUTE_CONTOUR]).routes[ROUTE_CONTOUR]
        assert rep.map50 == 0.0 and rep.map5095 == 0.0
        assert rep.quality_micro["b_f1"] is None

    def test_map5095_never_exceeds_map50(self):
        rng = np.random.default_rng(1)
        gts, preds = [], []
        for i in range(6):
            x, y = rng.uniform(0.05, 0.5, 2)
            w, h = rng.uniform(0.1, 0.4, 2)
            gts.append(gt_square(f"im{i % 3}", int(rng.integers(0, 2)), x, y, x + w, y + h))
            dx, dy = rng.uniform(0, 0.05, 2)
            preds.append(pred_square(f"im{i % 3}", gts[-1].class_id,
                                     float(rng.random()), x + dx, y + dy,
                                     x + w + dx, y + h + dy))
        rr = evaluate(preds, gts, routes=[ROUTE_CONTOUR]).routes[ROUTE_CONTOUR]
        assert rr.map5095 <= rr.map50 + 1e-12

    def test_dropped_predictions_counted(self):
        gts = [gt_square("a", 0, 0.2, 0.2, 0.6, 0.6)]
        bad = Prediction("a", 0, 0.9, ROUTE_MASK, BinaryMask(4, 4, np.zeros((4, 4), bool)))
        rep = evaluate([bad], gts, routes=[ROUTE_MASK]).routes[ROUTE_MASK]
        assert rep.n_dropped == 1 and rep.n_preds == 0

    def test_conf_floor(self):
        gts = [gt_square("a", 0, 0.2, 0.2, 0.6, 0.6)]
        preds = [pred_square("a", 0, 0.2, 0.2, 0.2, 0.6, 0.6)]
        rep = evaluate(preds, gts, routes=[ROUTE_CONTOUR], conf_floor=0.5)
        assert rep.routes[ROUTE_CONTOUR].n_preds == 0


class TestMatchedTpMetrics:
    def test_identical(self):
        sq = PolygonShape.from_ring(square_ring(0.2, 0.2, 0.7, 0.7))
        pm = matched_tp_metrics(sq, sq)
        assert pm.b_f1 == 1.0
        assert pm.chamfer == pytest.approx(0.0, abs=1e-15)
        assert pm.perimeter_err == 0.0 and pm.area_err == 0.0

    def test_grown_square(self):
        gt = PolygonShape.from_ring(square_ring(0.3, 0.3, 0.55, 0.55))
        center = 0.425
        side = 0.25 * 1.1
        pred = PolygonShape.from_ring(square_ring(center - side / 2, center - side / 2,
                                                  center + side / 2, center + side / 2))
        pm = matched_tp_metrics(pred, gt)
        assert pm.perimeter_err == pytest.approx(0.10, abs=1e-9)
        assert pm.area_err == pytest.approx(0.21, abs=1e-9)

    def test_small_shift_within_tolerance(self):
        gt = PolygonShape.from_ring(square_ring(0.2, 0.2, 0.45, 0.45))
        pred = PolygonShape.from_ring(square_ring(0.201, 0.2, 0.451, 0.45))
        pm = matched_tp_metrics(pred, gt)
        assert pm.b_f1 == 1.0
        assert pm.chamfer == pytest.approx(0.001, abs=1e-12)

    def test_chamfer_symmetric(self):
        a = PolygonShape.from_ring(square_ring(0.2, 0.2, 0.5, 0.5))
        b = PolygonShape.from_ring([[0.25, 0.2], [0.55, 0.3], [0.4, 0.6]])
        assert matched_tp_metrics(a, b).chamfer == pytest.approx(
            matched_tp_metrics(b, a).chamfer, abs=1e-15)

    def test_matches_naive_oracle(self):
        from contourledger.geometry import boundary_sample_count, ring_length
        rng = np.random.default_rng(2)
        for _ in range(5):
            t = np.sort(rng.uniform(0, 2 * np.pi, 20))
            ra, rb = rng.uniform(0.15, 0.3, 2)
            a = PolygonShape.from_ring(0.5 + np.stack([ra * np.cos(t), ra * np.sin(t)], 1))
            b = PolygonShape.from_ring(0.5 + np.stack([rb * np.cos(t), rb * np.sin(t)], 1))
            pm = matched_tp_metrics(a, b)
            ring_a, ring_b = a.components[0].exterior, b.components[0].exterior
            sa = oracles.loop_resample(ring_a, boundary_sample_count(ring_length(ring_a)))
            sb = oracles.loop_resample(ring_b, boundary_sample_count(ring_length(ring_b)))
            f1, cd = oracles.boundary_scores(sa, sb, 0.002222)
            assert pm.b_f1 == pytest.approx(f1, abs=1e-9)
            assert pm.chamfer == pytest.approx(cd, abs=1e-9)


class TestMicroAverage:
    def test_pair_weighted(self):
        micro, per_class = micro_average({0: [1.0], 1: [0.5, 0.5, 0.5]})
        assert micro == pytest.approx(0.625)
        assert per_class == {0: 1.0, 1: 0.5}

    def test_single_class(self):
        micro, per_class = micro_average({2: [0.2, 0.4]})
        assert micro == pytest.approx(per_class[2])

    def test_empty_absent(self):
        micro, per_class = micro_average({})
        assert micro is None and per_class == {}
