import xml.etree.ElementTree as ET

import pytest

from spinres.services.plot_service import LinePlot, NS_SVG, gnuplot_script, nice_ticks, write_text
from spinres.utils.errors import StorageError

SVG = f"{{{NS_SVG}}}"


def test_nice_ticks():
    assert nice_ticks(0.0, 200.0) == [0.0, 50.0, 100.0, 150.0, 200.0]
    assert nice_ticks(7.5, 12.0) == [8.0, 9.0, 10.0, 11.0, 12.0]
    assert nice_ticks(-0.3, 0.3) == pytest.approx([-0.2, 0.0, 0.2])


def test_svg_structure():
    plot = LinePlot("B (mT)", "FWHM (MHz)", title="Linewidth <sweep>")
    plot.add([0, 50, 100, 200], [7.7, 40.0, 9.0, 7.8], label="model")
    plot.add([0, 100], [8.0, 9.5], label="data", markers=True)

    root = ET.fromstring(plot.svg())
    assert root.tag == f"{SVG}svg"
    assert len(root.findall(f"{SVG}polyline")) == 1
    assert len(root.findall(f"{SVG}circle")) == 2
    texts = [t.text for t in root.findall(f"{SVG}text")]
    assert "B (mT)" in texts
    assert "Linewidth <sweep>" in texts
    assert "model" in texts and "data" in texts


def test_single_point_is_drawn_as_marker():
    root = ET.fromstring(LinePlot("x", "y").add([1.0], [2.0]).svg())
    assert len(root.findall(f"{SVG}circle")) == 1
    assert not root.findall(f"{SVG}polyline")


def test_points_stay_inside_plot_area():
    root = ET.fromstring(LinePlot("x", "y").add([0, 1, 2], [5, 5, 5], markers=True).svg())
    for circle in root.findall(f"{SVG}circle"):
        assert 0 <= float(circle.get("cx")) <= 640
        assert 0 <= float(circle.get("cy")) <= 420


def test_empty_plot():
    with pytest.raises(ValueError):
        LinePlot("x", "y").svg()


def test_gnuplot_script():
    script = gnuplot_script("sweep.csv", "B (T)", "FWHM (MHz)", [("1:2", "data"), ("1:3", "fit")], "sweep.svg")
    assert "set datafile separator ','" in script
    assert "set output 'sweep.svg'" in script
    assert "'sweep.csv' using 1:2 with lines title 'data'" in script
    assert "'sweep.csv' using 1:3 with lines title 'fit'" in script


def test_gnuplot_script_with_curve_from_another_file():
    script = gnuplot_script("data.csv", "B (mT)", "FWHM (MHz)", [("($1*1000):2", "data")], "out.svg",
                            curves=[("data.fit.model.csv", "($1*1000):2", "fit")])
    assert "'data.csv' using ($1*1000):2 with lines title 'data'" in script
    assert "'data.fit.model.csv' using ($1*1000):2 with lines title 'fit'" in script


def test_write_text(tmp_path):
    path = write_text(tmp_path / "plots" / "a.svg", "<svg/>")
    assert path.read_text() == "<svg/>"

    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(StorageError):
        write_text(blocker / "a.svg", "<svg/>")
