"""Published decomposition data for the 3x3 determinant.

Matrices are flattened row-major, so entry (i, j) is coordinate 3i+j, the
same convention as :func:`kronbound.catalog.det3`.  ``w`` is the primitive
sixth root of unity theta; ``a`` is a symbol left undetermined in the
source and resolved by :func:`kronbound.decomp.resolve_waring_symbol`.
"""

WARING18_TEXT = """\
decomposition Q6 18 waring
term -w 0 0 0 -1/3 0 0 0 1-w
term -1+w 0 0 0 -1/3 0 0 0 w
term -1+w 0 0 0 1/3-1/3*w 0 0 0 1-w
term -1 0 0 0 0 -1+w 0 -1/3*w 0
term 1-w 0 0 0 0 1 0 -1/3*w 0
term w 0 0 0 0 -a 0 -1/3*w 0
term 0 1/3-1/3*w 0 -a 0 0 0 0 1
term 0 1/3-1/3*w 0 -1+w 0 0 0 0 -1+w
term 0 1/3*w 0 -1+w 0 0 0 0 1
term 0 -1/3*w 0 0 0 1-w -1 0 0
term 0 -1/3+1/3*w 0 0 0 w -1 0 0
term 0 1/3 0 0 0 -1 -1 0 0
term 0 0 1 -1 0 0 0 -1/3 0
term 0 0 1 1-w 0 0 0 1/3*w 0
term 0 0 1 w 0 0 0 1/3-1/3*w 0
term 0 0 1-w 0 -1/3*w 0 1 0 0
term 0 0 1-w 0 -1/3+1/3*w 0 -1+w 0 0
term 0 0 w 0 -1/3+1/3*w 0 1 0 0
"""

# Symbols whose value is not printed alongside the matrices.
WARING18_SYMBOLS = ("a",)

# Pencils w(t) = a + t*b; each line lists a then b.
CURVE17_PATTERN_TEXT = """\
decomposition sym 17 curve
term z1 0 0 0 0 0 -1 0 0 ; 0 0 0 0 z2 0 0 0 0
term z3 0 0 z4 0 0 z6 0 0 ; 0 0 0 0 0 z5 0 0 0
term -z36 0 0 -z38 0 0 0 0 0 ; 0 z7 0 0 0 -z39 0 0 1
term 0 0 0 -z34 0 0 0 0 0 ; 0 0 1 0 0 0 0 z8 -z35
term 0 0 0 0 0 0 -1 0 0 ; 0 -z19 -z20 0 0 0 0 0 0
term -z22 0 0 -z23 0 0 -z25 0 0 ; 0 z9 0 0 0 -z24 0 0 0
term z10 0 0 z12 0 0 z14 0 0 ; 0 z11 0 0 0 z13 0 0 0
term z15 0 0 z16 0 0 z18 0 0 ; 0 -1 0 0 0 z17 0 0 0
term 0 0 0 0 0 0 1 0 0 ; 0 z19 z20 0 z21 0 0 0 0
term -z41 0 0 0 0 0 -z44 0 0 ; 0 0 0 0 0 0 0 0 0
term z22 0 0 z23 0 0 z25 0 0 ; 0 0 0 0 0 z24 0 0 0
term -z31 0 0 0 0 0 0 0 0 ; 0 z26 0 0 z27 0 0 0 1
term z28 0 0 z30 0 0 0 0 0 ; 0 z29 0 0 0 -1 0 1 0
term z31 0 0 0 0 0 0 0 0 ; 0 z32 0 0 0 0 0 z33 -1
term 0 0 0 z34 0 0 0 0 0 ; 0 0 -1 0 0 0 0 0 z35
term z36 0 0 z38 0 0 0 0 0 ; 0 z37 0 0 0 z39 0 z40 -1
term z41 0 0 0 0 0 z44 0 0 ; 0 z42 0 0 z43 0 0 0 0
"""

# Approximate values of z1..z44 for the pencils above.
CURVE17_Z = tuple(float(x) for x in """
1.0341303806794238 -0.6066087406897118 -0.4331964776172146 -0.5152923683008614
1.1019940400777668 -0.33447627606016894 1.3937189599517956 -1.3401309752067538
-1.2201783790300236 -1.1103788135827575 0.37022889546404436 -0.1227337587533339
0.26247598253492377 0.894290862965947 -0.20773775480941792 0.3315077787202416
-0.7089559614355241 0.6855576189239698 -0.4722848255899206 -0.9166202081004127
1.0909643832448142 0.4221322178021185 -0.6736383281807052 -1.073848039350398
0.32593342631062516 -0.6673200317255732 0.6843756251380806 0.7069807348981427
-0.11537625749781802 0.4675999593105763 -1.4611858799007322 0.2384593384371237
-0.3311285641764937 0.746195721538129 -0.772112178519887 -0.4281556127057231
0.06987318010552104 0.6832504579867711 0.6056114283897835 1.1300573157242386
-0.8526384006108028 0.7003183270586906 -1.1175675467046928 -0.6583324929853192
""".split())
