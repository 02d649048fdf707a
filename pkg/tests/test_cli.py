import json

import pytest

from threshold_mldsa import keystore
from threshold_mldsa.cli import main


@pytest.fixture
def ks(tmp_path):
    d = tmp_path / "ks"
    assert main(["keygen", "-T", "3", "-N", "5", "--out", str(d), "--seed", "1"]) == 0
    (tmp_path / "msg").write_bytes(b"cli message")
    return d


def sign(ks, tmp_path, signers="1,2,4,5", profile="p1", name="sig.bin", seed="2"):
    return main(["sign", "--keystore", str(ks), "--signers", signers, "--message",
                 str(tmp_path / "msg"), "--out", str(tmp_path / name), "--profile", profile,
                 "--seed", seed])


def verify(ks, tmp_path, name="sig.bin", pk=None):
    return main(["verify", "--pk", str(pk or ks / "pk.bin"), "--message", str(tmp_path / "msg"),
                 "--signature", str(tmp_path / name)])


def test_keygen_layout(ks):
    names = sorted(p.name for p in ks.iterdir())
    assert names.count("pk.bin") == 1
    assert len([n for n in names if n.startswith("share_")]) == 5
    assert len([n for n in names if n.startswith("seeds_")]) == 5


def test_keygen_deterministic(ks, tmp_path):
    other = tmp_path / "again"
    main(["keygen", "-T", "3", "-N", "5", "--out", str(other), "--seed", "1"])
    for p in ks.iterdir():
        assert (other / p.name).read_bytes() == p.read_bytes()


def test_keygen_usage_errors(ks, tmp_path):
    assert main(["keygen", "-T", "6", "-N", "5", "--out", str(tmp_path / "x")]) == 2
    assert main(["keygen", "-T", "2", "-N", "5", "--out", str(ks)]) == 2
    assert main(["keygen"]) == 2


@pytest.mark.parametrize("profile", ["p1", "p2", "p3"])
def test_sign_and_verify(ks, tmp_path, profile):
    assert sign(ks, tmp_path, profile=profile) == 0
    assert len((tmp_path / "sig.bin").read_bytes()) == 3309
    assert verify(ks, tmp_path) == 0


def test_sign_report_json(ks, tmp_path, capsys):
    main(["sign", "--keystore", str(ks), "--signers", "1,2,3,4", "--message", str(tmp_path / "msg"),
          "--out", str(tmp_path / "s.bin"), "--json", "--seed", "3"])
    report = json.loads(capsys.readouterr().out)
    assert report["attempts"] >= 1 and report["bytes"] == 3309


def test_too_few_signers(ks, tmp_path, capsys):
    assert sign(ks, tmp_path, signers="1,2,3") == 2
    assert "T+1" in capsys.readouterr().err


def test_verify_failures(ks, tmp_path):
    sign(ks, tmp_path)
    data = bytearray((tmp_path / "sig.bin").read_bytes())
    data[500] ^= 1
    (tmp_path / "bad.bin").write_bytes(bytes(data))
    assert verify(ks, tmp_path, "bad.bin") == 1
    other = tmp_path / "other"
    main(["keygen", "-T", "3", "-N", "5", "--out", str(other), "--seed", "9"])
    assert verify(ks, tmp_path, pk=other / "pk.bin") == 1


def test_refresh_then_sign(ks, tmp_path):
    for epoch in (1, 2):
        assert main(["refresh", "--keystore", str(ks), "--seed", str(epoch)]) == 0
        assert keystore.read_keystore(ks)[0].epoch == epoch
        assert sign(ks, tmp_path, seed=str(10 + epoch)) == 0
        assert verify(ks, tmp_path) == 0


def test_refresh_missing_share(ks):
    (ks / "share_3.bin").unlink()
    assert main(["refresh", "--keystore", str(ks)]) == 2


def test_dkg_command(tmp_path):
    d = tmp_path / "dkg"
    (tmp_path / "msg").write_bytes(b"m")
    assert main(["dkg", "-T", "2", "-N", "4", "--out", str(d), "--seed", "4"]) == 0
    assert sign(d, tmp_path, signers="1,3,4") == 0
    assert verify(d, tmp_path) == 0


def test_blame_demo_exit_code():
    assert main(["blame-demo", "--fault", "w_offset", "--seed", "1"]) == 4
    assert main(["blame-demo", "--fault", "none", "--seed", "1"]) == 0


def test_demos(capsys):
    assert main(["mpc-demo", "--coeffs", "64", "--seed", "1"]) == 0
    assert main(["renyi"]) == 0
    out = capsys.readouterr().out
    assert "note: |S|=4" in out and "round_count: 8" in out


def test_bench_csv(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bench", "--config", "2,3", "--trials", "5", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().startswith("T,N,S")


def test_container_format(ks, capsys):
    raw = (ks / "keystore.bin").read_bytes()
    assert raw[:4] == b"TMLD" and raw[4] == 1
    with pytest.raises(keystore.FormatError):
        keystore.unpack(b"XXXX" + raw[4:])
    with pytest.raises(keystore.FormatError):
        keystore.unpack(raw[:-5])
    with pytest.raises(keystore.FormatError):
        keystore.load_key((ks / "pk.bin").read_bytes())
    assert main(["inspect", str(ks / "share_1.bin")]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "share"


def test_bare_pk_accepted(ks):
    pk = keystore.load_pk((ks / "pk.bin").read_bytes())
    assert keystore.load_pk(pk.to_bytes()) == pk
