"""
单元测试 - 模型包持久化
"""

import numpy as np
import pytest

from tsfex_core.bundle import (
    ModelBundle,
    RouteBundle,
    bundle_to_bytes,
    load_bundle,
    save_bundle,
)
from tsfex_core.exceptions import BundleFormatError, DataError


def route(**overrides) -> RouteBundle:
    fields = {
        "grains": ["fine"],
        "schema": ["a", "b"],
        "fitted_columns": ["a", "b", "c"],
        "blocks": [{"name": "baseline", "params": {}, "state": {"x": np.array([1.0, 2.0])}}],
        "learner": "ridge",
        "learner_state": {"weights": np.arange(4, dtype=np.int32), "alpha": 0.5},
        "classes": [1.2, 4.5],
    }
    fields.update(overrides)
    return RouteBundle(**fields)


class TestBundle:
    """模型包读写测试"""

    def test_round_trip(self, tmp_path):
        bundle = ModelBundle(routes={"fine": route()}, provenance={"seed": 3, "routing": "dual"})
        path = tmp_path / "model.npz"
        save_bundle(bundle, path)
        loaded = load_bundle(path)
        r = loaded.routes["fine"]
        assert r.schema == ["a", "b"]
        assert r.classes == [1.2, 4.5]
        np.testing.assert_array_equal(r.blocks[0]["state"]["x"], [1.0, 2.0])
        assert r.learner_state["weights"].dtype == np.dtype("<i8")
        assert r.learner_state["alpha"] == 0.5
        assert loaded.provenance == {"seed": 3, "routing": "dual"}

    def test_bytes_deterministic(self):
        bundle = ModelBundle(routes={"fine": route()}, provenance={"seed": 1})
        assert bundle_to_bytes(bundle) == bundle_to_bytes(bundle)

    def test_missing_file(self, tmp_path):
        with pytest.raises(BundleFormatError):
            load_bundle(tmp_path / "absent.npz")

    @pytest.mark.parametrize("content", [b"", b"not a bundle"])
    def test_garbage(self, tmp_path, content):
        path = tmp_path / "bad.npz"
        path.write_bytes(content)
        with pytest.raises(BundleFormatError):
            load_bundle(path)

    def test_missing_manifest(self, tmp_path):
        path = tmp_path / "plain.npz"
        np.savez(path, a=np.zeros(2))
        with pytest.raises(BundleFormatError):
            load_bundle(path)

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "future.npz"
        path.write_bytes(bundle_to_bytes(ModelBundle(format_version=99)))
        with pytest.raises(BundleFormatError):
            load_bundle(path)

    def test_schema_length_mismatch(self, tmp_path):
        bad = route(learner="gbdt", learner_state={"n_features": 5})
        path = tmp_path / "m.npz"
        save_bundle(ModelBundle(routes={"fine": bad}), path)
        with pytest.raises(BundleFormatError):
            load_bundle(path)

    def test_format_error_is_data_error(self):
        assert issubclass(BundleFormatError, DataError)
