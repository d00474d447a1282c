from main import EXIT_ALL_FAILED, EXIT_CONFIG, EXIT_OK, main


def test_list_functions(capsys):
    assert main(["list-functions"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ackley:a=20,b=0.2,c=6.28319" in out
    assert "michalewicz:m=10" in out


def test_compare_prints_report(capsys):
    code = main(["compare", "--fn-a", "parabola", "--fn-b", "power:k=4", "--points", "6", "--restarts", "1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "total" in out
    assert "parabola" in out


def test_compare_with_covariance_term(capsys):
    code = main(["compare", "--fn-a", "parabola", "--fn-b", "parabola", "--points", "5", "--restarts", "1", "--eps2", "0.2"])
    assert code == EXIT_OK


def test_compare_dimension_mismatch(capsys):
    assert main(["compare", "--fn-a", "parabola", "--fn-b", "sphere"]) == EXIT_CONFIG
    assert "Invalid arguments" in capsys.readouterr().err


def test_run_partial_failure(small_suite, tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["run", "--config", str(small_suite), "--out", str(out_dir)]) == 3
    printed = capsys.readouterr().out
    assert "1 experiment(s) failed" in printed
    assert (out_dir / "summary.csv").is_file()


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "Config error" in capsys.readouterr().err


def test_run_all_failed(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("experiments:\n  - {pair_id: x, fn_a: parabola, fn_b: sphere}\n", encoding="utf-8")
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_ALL_FAILED


def test_show(small_suite, tmp_path, capsys):
    out_dir = tmp_path / "out"
    main(["run", "--config", str(small_suite), "--out", str(out_dir)])
    capsys.readouterr()

    assert main(["show", "--out", str(out_dir)]) == EXIT_OK
    listing = capsys.readouterr().out
    assert "broken" in listing and "FAILED" in listing

    assert main(["show", "--out", str(out_dir), "--pair", "parabola_vs_power"]) == EXIT_OK
    assert "total" in capsys.readouterr().out

    assert main(["show", "--out", str(out_dir), "--pair", "broken"]) == EXIT_OK
    assert "failed at spec" in capsys.readouterr().out

    assert main(["show", "--out", str(out_dir), "--pair", "missing"]) == EXIT_CONFIG


def test_screen(capsys):
    code = main(
        ["screen", "--fn", "parabola", "--fn", "power:k=2", "--fn", "power:k=6", "--points", "8", "--restarts", "1"]
    )
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "parabola ~ power:k=2" in out


def test_invalid_measure_arguments(capsys):
    assert main(["compare", "--fn-a", "parabola", "--fn-b", "parabola", "--eps1", "0.8", "--eps2", "0.5"]) == EXIT_CONFIG


def test_zero_restarts_is_not_replaced_by_default(small_suite, tmp_path, capsys):
    assert main(["compare", "--fn-a", "parabola", "--fn-b", "parabola", "--points", "5", "--restarts", "0"]) == EXIT_CONFIG
    assert "restarts" in capsys.readouterr().err
    assert main(["run", "--config", str(small_suite), "--out", str(tmp_path), "--restarts", "0"]) == EXIT_CONFIG
    assert "restarts" in capsys.readouterr().err


def test_zero_points_is_not_replaced_by_default():
    assert main(["compare", "--fn-a", "parabola", "--fn-b", "parabola", "--points", "0"]) == EXIT_CONFIG
