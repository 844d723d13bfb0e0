#!/usr/bin/env python3
"""Regenerates the synthetic index fixtures in tests/data/ with `qvar simulate`.

Real index closes are not redistributable here, so each fixture is a
regime-switching q-Gaussian surrogate. Every regime carries an approximate
annualized volatility and the log-change of the index level over the segment,
taken from the public history of the index. Within a regime, daily log-returns
are q-Gaussian with q = 1.25 (1.30 in acute crash segments).

Usage: tools/make_fixtures.py path/to/qvar [outdir]
"""

import math
import subprocess
import sys
from datetime import date, timedelta

Q_CALM = 1.25
Q_CRASH = 1.30


def sigma_q(daily_std, q):
    # sigma_q giving the requested ordinary standard deviation
    return daily_std / math.sqrt((3.0 - q) / (5.0 - 3.0 * q))


def weekdays(a, b):
    d0 = date.fromisoformat(a)
    d1 = date.fromisoformat(b)
    n = 0
    while d0 <= d1:
        if d0.weekday() < 5:
            n += 1
        d0 += timedelta(days=1)
    return n


# (from, to, annualized vol in percent, level at start, level at end, crash?)
FIXTURES = {
    "djia": dict(span=("2000-01-20", "2019-03-20"), n=4567, seed=101, segments=[
        ("2000-01-01", "2000-12-31", 22, 11497, 10787, False),
        ("2001-01-01", "2001-12-31", 21, 10787, 10021, False),
        ("2002-01-01", "2002-12-31", 25, 10021, 8342, False),
        ("2003-01-01", "2003-12-31", 17, 8342, 10454, False),
        ("2004-01-01", "2006-12-31", 10, 10454, 12463, False),
        ("2007-01-01", "2007-12-31", 15, 12463, 13265, False),
        ("2008-01-01", "2008-08-31", 20, 13265, 11544, False),
        ("2008-09-01", "2008-12-31", 55, 11544, 8776, True),
        ("2009-01-01", "2009-03-31", 40, 8776, 7609, True),
        ("2009-04-01", "2009-12-31", 20, 7609, 10428, False),
        ("2010-01-01", "2010-12-31", 16, 10428, 11578, False),
        ("2011-01-01", "2011-07-31", 13, 11578, 12143, False),
        ("2011-08-01", "2011-10-31", 32, 12143, 11955, True),
        ("2011-11-01", "2012-12-31", 12, 11955, 13104, False),
        ("2013-01-01", "2014-12-31", 11, 13104, 17823, False),
        ("2015-01-01", "2016-12-31", 14, 17823, 19763, False),
        ("2017-01-01", "2017-12-31", 7, 19763, 24719, False),
        ("2018-01-01", "2018-12-31", 17, 24719, 23327, False),
        ("2019-01-01", "2019-03-31", 13, 23327, 25745, False),
    ]),
    "n225": dict(span=("2000-01-20", "2019-03-20"), n=4456, seed=102, segments=[
        ("2000-01-01", "2000-12-31", 22, 18934, 13786, False),
        ("2001-01-01", "2001-12-31", 27, 13786, 10543, False),
        ("2002-01-01", "2003-12-31", 24, 10543, 10677, False),
        ("2004-01-01", "2004-12-31", 18, 10677, 11489, False),
        ("2005-01-01", "2005-12-31", 13, 11489, 16111, False),
        ("2006-01-01", "2006-12-31", 20, 16111, 17226, False),
        ("2007-01-01", "2007-12-31", 18, 17226, 15308, False),
        ("2008-01-01", "2008-08-31", 27, 15308, 13073, False),
        ("2008-09-01", "2008-12-31", 65, 13073, 8860, True),
        ("2009-01-01", "2009-03-31", 40, 8860, 8110, True),
        ("2009-04-01", "2009-12-31", 24, 8110, 10546, False),
        ("2010-01-01", "2011-02-28", 20, 10546, 10624, False),
        ("2011-03-01", "2011-04-30", 45, 10624, 9850, True),
        ("2011-05-01", "2012-12-31", 18, 9850, 10395, False),
        ("2013-01-01", "2013-12-31", 27, 10395, 16291, False),
        ("2014-01-01", "2015-12-31", 21, 16291, 19034, False),
        ("2016-01-01", "2016-12-31", 26, 19034, 19114, False),
        ("2017-01-01", "2017-12-31", 13, 19114, 22765, False),
        ("2018-01-01", "2019-03-31", 18, 22765, 21608, False),
    ]),
    "dax": dict(span=("2000-01-20", "2019-03-20"), n=4609, seed=103, segments=[
        ("2000-01-01", "2000-12-31", 23, 6958, 6434, False),
        ("2001-01-01", "2001-12-31", 29, 6434, 5160, False),
        ("2002-01-01", "2002-12-31", 41, 5160, 2893, False),
        ("2003-01-01", "2003-12-31", 33, 2893, 3965, False),
        ("2004-01-01", "2006-12-31", 14, 3965, 6597, False),
        ("2007-01-01", "2007-12-31", 16, 6597, 8067, False),
        ("2008-01-01", "2008-08-31", 22, 8067, 6422, False),
        ("2008-09-01", "2008-12-31", 55, 6422, 4810, True),
        ("2009-01-01", "2009-03-31", 40, 4810, 4085, True),
        ("2009-04-01", "2009-12-31", 23, 4085, 5957, False),
        ("2010-01-01", "2011-07-31", 18, 5957, 6953, False),
        ("2011-08-01", "2011-10-31", 45, 6953, 6141, True),
        ("2011-11-01", "2012-12-31", 20, 6141, 7612, False),
        ("2013-01-01", "2014-12-31", 15, 7612, 9806, False),
        ("2015-01-01", "2016-12-31", 21, 9806, 11481, False),
        ("2017-01-01", "2017-12-31", 11, 11481, 12918, False),
        ("2018-01-01", "2019-03-31", 15, 12918, 11603, False),
    ]),
    "tse": dict(span=("2009-01-20", "2019-03-20"), n=2455, seed=104, segments=[
        ("2009-01-01", "2009-12-31", 10, 7500, 11200, False),
        ("2010-01-01", "2010-12-31", 12, 11200, 18700, False),
        ("2011-01-01", "2012-12-31", 10, 18700, 38000, False),
        ("2013-01-01", "2013-12-31", 18, 38000, 80000, False),
        ("2014-01-01", "2015-12-31", 13, 80000, 62000, False),
        ("2016-01-01", "2017-12-31", 9, 62000, 96000, False),
        ("2018-01-01", "2018-12-31", 15, 96000, 179000, False),
        ("2019-01-01", "2019-03-31", 12, 179000, 176000, False),
    ]),
    "sse": dict(span=("2000-01-20", "2019-03-20"), n=4501, seed=105, segments=[
        ("2000-01-01", "2000-12-31", 20, 1367, 2073, False),
        ("2001-01-01", "2002-12-31", 22, 2073, 1358, False),
        ("2003-01-01", "2005-12-31", 18, 1358, 1161, False),
        ("2006-01-01", "2006-12-31", 22, 1161, 2675, False),
        ("2007-01-01", "2007-12-31", 30, 2675, 5262, False),
        ("2008-01-01", "2008-12-31", 40, 5262, 1821, False),
        ("2009-01-01", "2010-12-31", 27, 1821, 2808, False),
        ("2011-01-01", "2014-10-31", 17, 2808, 2420, False),
        ("2014-11-01", "2015-05-31", 30, 2420, 4612, False),
        ("2015-06-01", "2015-09-30", 55, 4612, 3053, True),
        ("2015-10-01", "2015-12-31", 30, 3053, 3539, False),
        ("2016-01-01", "2016-01-31", 45, 3539, 2738, True),
        ("2016-02-01", "2016-12-31", 16, 2738, 3104, False),
        ("2017-01-01", "2017-12-31", 8, 3104, 3307, False),
        ("2018-01-01", "2018-12-31", 18, 3307, 2494, False),
        ("2019-01-01", "2019-03-31", 25, 2494, 3091, False),
    ]),
    "bse": dict(span=("2000-01-20", "2019-03-20"), n=4477, seed=106, segments=[
        ("2000-01-01", "2001-12-31", 28, 5005, 3262, False),
        ("2002-01-01", "2003-12-31", 16, 3262, 5839, False),
        ("2004-01-01", "2004-12-31", 24, 5839, 6603, False),
        ("2005-01-01", "2005-12-31", 14, 6603, 9398, False),
        ("2006-01-01", "2007-12-31", 24, 9398, 20287, False),
        ("2008-01-01", "2008-08-31", 33, 20287, 14565, False),
        ("2008-09-01", "2008-12-31", 50, 14565, 9647, True),
        ("2009-01-01", "2009-05-31", 38, 9647, 14625, True),
        ("2009-06-01", "2010-12-31", 20, 14625, 20509, False),
        ("2011-01-01", "2013-12-31", 17, 20509, 21171, False),
        ("2014-01-01", "2016-12-31", 14, 21171, 26626, False),
        ("2017-01-01", "2017-12-31", 9, 26626, 34057, False),
        ("2018-01-01", "2019-03-31", 12, 34057, 38387, False),
    ]),
}


def command(qvar, name, spec, outdir):
    first, last = spec["span"]
    total_weekdays = weekdays(first, last)
    keep = spec["n"] / total_weekdays
    args = [qvar, "simulate", "--q", str(Q_CALM), "--sigma", "0.01",
            "--from", first, "--to", last, "--n", str(spec["n"]), "--seed", str(spec["seed"])]
    for a, b, vol, lvl0, lvl1, crash in spec["segments"]:
        q = Q_CRASH if crash else Q_CALM
        days = weekdays(a, b) * keep
        mu = math.log(lvl1 / lvl0) / days
        std = vol / 100.0 / math.sqrt(252.0)
        args += ["--regime", f"{a}:{b}:{q}:{sigma_q(std, q):.6g}:{mu:.6g}"]
    args += ["--out", f"{outdir}/{name}.csv"]
    return args


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    qvar = sys.argv[1]
    outdir = sys.argv[2] if len(sys.argv) > 2 else "tests/data"
    for name, spec in FIXTURES.items():
        args = command(qvar, name, spec, outdir)
        subprocess.run(args, check=True)
        print(" ".join(args[1:]))


if __name__ == "__main__":
    main()
