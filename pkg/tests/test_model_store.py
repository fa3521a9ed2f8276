import numpy as np
import pytest

from cryscreen import model_store, svm
from cryscreen.errors import BadMagic, DigestMismatch, Truncated, UnsupportedVersion
from cryscreen.model_store import (
    deserialize_model,
    load_model,
    save_model,
    serialize_model,
)


@pytest.fixture(scope="module")
def saved(trained, pipeline_cfg, tmp_path_factory):
    model, _, _ = trained
    path = tmp_path_factory.mktemp("store") / "m.ubw"
    digest = save_model(model, pipeline_cfg, path)
    return model, pipeline_cfg, path, digest


class TestRoundTrip:
    def test_structural_identity(self, saved):
        model, cfg, path, digest = saved
        loaded, loaded_cfg, loaded_digest = load_model(path)
        assert loaded_digest == digest
        assert loaded_cfg == cfg
        assert loaded.kernel == model.kernel
        assert loaded.bias == model.bias
        assert np.array_equal(loaded.support_vectors, model.support_vectors)
        assert np.array_equal(loaded.dual_coefs, model.dual_coefs)
        assert np.array_equal(loaded.standardizer.means, model.standardizer.means)
        assert loaded.training_meta == model.training_meta

    def test_decision_values_identical(self, saved, rng):
        model, cfg, path, _ = saved
        loaded, _, _ = load_model(path)
        probes = rng.normal(size=(100, model.dim))
        a = svm.decision_values(model, probes)
        b = svm.decision_values(loaded, probes)
        assert np.array_equal(a, b)

    def test_save_twice_byte_identical(self, saved, tmp_path):
        model, cfg, path, _ = saved
        p2 = tmp_path / "again.ubw"
        save_model(model, cfg, p2)
        assert path.read_bytes() == p2.read_bytes()

    def test_load_save_load_byte_identical(self, saved, tmp_path):
        model, cfg, path, _ = saved
        loaded, loaded_cfg, _ = load_model(path)
        p2 = tmp_path / "resaved.ubw"
        save_model(loaded, loaded_cfg, p2)
        assert path.read_bytes() == p2.read_bytes()

    def test_file_size_formula(self, saved):
        model, cfg, path, _ = saved
        dim = model.dim
        n_sv = model.n_support_vectors
        expected = (
            8                    # magic + version
            + 68                 # feature config
            + 13                 # pipeline config
            + 9                  # kernel
            + 4 + 17 * dim       # standardizer: count + means + stds + mask
            + 8 + 8 * n_sv * dim  # sv matrix with (rows, cols) prefix
            + 4 + 8 * n_sv       # dual coefs with count prefix
            + 8                  # bias
            + 37                 # training meta
            + 32                 # digest
        )
        assert path.stat().st_size == expected


class TestValidation:
    def test_flip_payload_byte(self, saved):
        _, _, path, _ = saved
        blob = bytearray(path.read_bytes())
        blob[-40] ^= 0xFF  # inside the trailing float fields, before digest
        with pytest.raises(DigestMismatch):
            deserialize_model(bytes(blob))

    def test_truncated(self, saved):
        _, _, path, _ = saved
        blob = path.read_bytes()
        with pytest.raises(Truncated):
            deserialize_model(blob[: len(blob) // 2])

    def test_truncated_inside_digest(self, saved):
        _, _, path, _ = saved
        blob = path.read_bytes()
        with pytest.raises(Truncated):
            deserialize_model(blob[:-5])

    def test_bad_magic(self, saved):
        _, _, path, _ = saved
        blob = b"UBW0" + path.read_bytes()[4:]
        with pytest.raises(BadMagic):
            deserialize_model(blob)

    def test_unsupported_version(self, saved):
        _, _, path, _ = saved
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        with pytest.raises(UnsupportedVersion):
            deserialize_model(bytes(blob))

    def test_trailing_garbage_rejected(self, saved):
        _, _, path, _ = saved
        with pytest.raises(DigestMismatch):
            deserialize_model(path.read_bytes() + b"junk")

    def test_empty_file(self):
        with pytest.raises(Truncated):
            deserialize_model(b"")

    def test_short_digest_is_prefix(self, saved):
        _, _, _, digest = saved
        assert model_store.short_digest(digest) == digest[:8]
        assert len(model_store.short_digest(digest)) == 8

    def test_model_digest_matches_saved(self, saved):
        model, cfg, _, digest = saved
        assert model_store.model_digest(model, cfg) == digest

    def test_serialize_deterministic(self, saved):
        model, cfg, _, _ = saved
        assert serialize_model(model, cfg) == serialize_model(model, cfg)
