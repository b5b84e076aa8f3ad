import numpy as np
import pytest
from PIL import Image

from ript.io import (ImageFormatError, read_image, read_pgm, rescale_to_uint16, to_uint8,
                     write_pgm)


def test_8bit_pgm_decodes_bytes_verbatim(tmp_path):
    raster = bytes(range(12))
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n# comment line\n4 3\n255\n" + raster)
    img = read_pgm(path)
    assert img.dtype == np.uint8 and img.shape == (3, 4)
    assert img.tobytes() == raster


def test_16bit_pgm_is_big_endian(tmp_path):
    path = tmp_path / "b.pgm"
    path.write_bytes(b"P5 2 1 65535\n" + bytes([0x01, 0x02, 0xFF, 0x00]))
    img = read_pgm(path)
    assert img.dtype == np.uint16
    assert img.tolist() == [[0x0102, 0xFF00]]


@pytest.mark.parametrize("dtype,maxval", [(np.uint8, 255), (np.uint16, 65535), (np.uint16, 1023)])
def test_pgm_round_trip_is_bit_exact(tmp_path, dtype, maxval):
    img = np.random.default_rng(0).integers(0, maxval + 1, size=(17, 23)).astype(dtype)
    path = tmp_path / "c.pgm"
    write_pgm(path, img, maxval=maxval)
    back = read_pgm(path)
    assert back.dtype == dtype and np.array_equal(back, img)
    assert path.read_bytes().startswith(f"P5\n23 17\n{maxval}\n".encode())


@pytest.mark.parametrize("payload", [b"P2\n2 2\n255\n0 0 0 0", b"P5\n2 2\n255\n\x00",
                                     b"P5\n2 x\n255\n\x00\x00\x00\x00", b"P5\n2"])
def test_malformed_pgm(tmp_path, payload):
    path = tmp_path / "bad.pgm"
    path.write_bytes(payload)
    with pytest.raises(ImageFormatError):
        read_image(path)


def test_write_rejects_invalid_samples(tmp_path):
    with pytest.raises(ImageFormatError):
        write_pgm(tmp_path / "x.pgm", np.zeros((2, 2)))
    with pytest.raises(ImageFormatError):
        write_pgm(tmp_path / "x.pgm", np.full((2, 2), -1))
    with pytest.raises(ImageFormatError):
        write_pgm(tmp_path / "x.pgm", np.zeros((2, 2, 3), dtype=np.uint8))


def test_grayscale_png(tmp_path):
    img = np.random.default_rng(1).integers(0, 256, size=(9, 11)).astype(np.uint8)
    Image.fromarray(img, mode="L").save(tmp_path / "g.png")
    assert np.array_equal(read_image(tmp_path / "g.png"), img)


def test_16bit_png(tmp_path):
    img = np.random.default_rng(2).integers(0, 65536, size=(5, 6)).astype(np.uint16)
    Image.fromarray(img).save(tmp_path / "g16.png")
    assert np.array_equal(read_image(tmp_path / "g16.png"), img)


@pytest.mark.parametrize("mode", ["RGB", "RGBA", "LA"])
def test_multichannel_png_rejected(tmp_path, mode):
    Image.new(mode, (4, 4)).save(tmp_path / "c.png")
    with pytest.raises(ImageFormatError):
        read_image(tmp_path / "c.png")


def test_unknown_format(tmp_path):
    (tmp_path / "x.pgm").write_bytes(b"GIF89a....")
    with pytest.raises(ImageFormatError):
        read_image(tmp_path / "x.pgm")


def test_rescale_records_inverse():
    img = np.array([[-2.0, 0.0], [1.0, 6.0]])
    samples, rec = rescale_to_uint16(img)
    assert samples.dtype == np.uint16 and samples.min() == 0 and samples.max() == 65535
    np.testing.assert_allclose(rec["min"] + samples / rec["scale"], img, atol=0.5 / rec["scale"])


def test_rescale_constant_image():
    samples, rec = rescale_to_uint16(np.full((3, 3), 4.0))
    assert not samples.any() and rec == {"min": 4.0, "max": 4.0, "scale": 0.0}


def test_to_uint8():
    assert to_uint8(np.array([[1.0, 3.0]])).tolist() == [[0, 255]]
    assert not to_uint8(np.ones((2, 2))).any()
