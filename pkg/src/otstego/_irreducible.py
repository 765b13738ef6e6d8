"""Lowest-weight irreducible binary polynomials, degrees 1 to 256.

Each entry lists exponents of the nonzero terms.  Trinomials are used when
one exists (smallest middle exponent), otherwise the pentanomial with the
smallest (k3, k2, k1) in that order.
"""

LOW_WEIGHT_IRREDUCIBLE = {
    1: (1, 0),
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 1, 0),
    9: (9, 1, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 3, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 5, 0),
    15: (15, 1, 0),
    16: (16, 5, 3, 1, 0),
    17: (17, 3, 0),
    18: (18, 3, 0),
    19: (19, 5, 2, 1, 0),
    20: (20, 3, 0),
    21: (21, 2, 0),
    22: (22, 1, 0),
    23: (23, 5, 0),
    24: (24, 4, 3, 1, 0),
    25: (25, 3, 0),
    26: (26, 4, 3, 1, 0),
    27: (27, 5, 2, 1, 0),
    28: (28, 1, 0),
    29: (29, 2, 0),
    30: (30, 1, 0),
    31: (31, 3, 0),
    32: (32, 7, 3, 2, 0),
    33: (33, 10, 0),
    34: (34, 7, 0),
    35: (35, 2, 0),
    36: (36, 9, 0),
    37: (37, 6, 4, 1, 0),
    38: (38, 6, 5, 1, 0),
    39: (39, 4, 0),
    40: (40, 5, 4, 3, 0),
    41: (41, 3, 0),
    42: (42, 7, 0),
    43: (43, 6, 4, 3, 0),
    44: (44, 5, 0),
    45: (45, 4, 3, 1, 0),
    46: (46, 1, 0),
    47: (47, 5, 0),
    48: (48, 5, 3, 2, 0),
    49: (49, 9, 0),
    50: (50, 4, 3, 2, 0),
    51: (51, 6, 3, 1, 0),
    52: (52, 3, 0),
    53: (53, 6, 2, 1, 0),
    54: (54, 9, 0),
    55: (55, 7, 0),
    56: (56, 7, 4, 2, 0),
    57: (57, 4, 0),
    58: (58, 19, 0),
    59: (59, 7, 4, 2, 0),
    60: (60, 1, 0),
    61: (61, 5, 2, 1, 0),
    62: (62, 29, 0),
    63: (63, 1, 0),
    64: (64, 4, 3, 1, 0),
    65: (65, 18, 0),
    66: (66, 3, 0),
    67: (67, 5, 2, 1, 0),
    68: (68, 9, 0),
    69: (69, 6, 5, 2, 0),
    70: (70, 5, 3, 1, 0),
    71: (71, 6, 0),
    72: (72, 10, 9, 3, 0),
    73: (73, 25, 0),
    74: (74, 35, 0),
    75: (75, 6, 3, 1, 0),
    76: (76, 21, 0),
    77: (77, 6, 5, 2, 0),
    78: (78, 6, 5, 3, 0),
    79: (79, 9, 0),
    80: (80, 9, 4, 2, 0),
    81: (81, 4, 0),
    82: (82, 8, 3, 1, 0),
    83: (83, 7, 4, 2, 0),
    84: (84, 5, 0),
    85: (85, 8, 2, 1, 0),
    86: (86, 21, 0),
    87: (87, 13, 0),
    88: (88, 7, 6, 2, 0),
    89: (89, 38, 0),
    90: (90, 27, 0),
    91: (91, 8, 5, 1, 0),
    92: (92, 21, 0),
    93: (93, 2, 0),
    94: (94, 21, 0),
    95: (95, 11, 0),
    96: (96, 10, 9, 6, 0),
    97: (97, 6, 0),
    98: (98, 11, 0),
    99: (99, 6, 3, 1, 0),
    100: (100, 15, 0),
    101: (101, 7, 6, 1, 0),
    102: (102, 29, 0),
    103: (103, 9, 0),
    104: (104, 4, 3, 1, 0),
    105: (105, 4, 0),
    106: (106, 15, 0),
    107: (107, 9, 7, 4, 0),
    108: (108, 17, 0),
    109: (109, 5, 4, 2, 0),
    110: (110, 33, 0),
    111: (111, 10, 0),
    112: (112, 5, 4, 3, 0),
    113: (113, 9, 0),
    114: (114, 5, 3, 2, 0),
    115: (115, 8, 7, 5, 0),
    116: (116, 4, 2, 1, 0),
    117: (117, 5, 2, 1, 0),
    118: (118, 33, 0),
    119: (119, 8, 0),
    120: (120, 4, 3, 1, 0),
    121: (121, 18, 0),
    122: (122, 6, 2, 1, 0),
    123: (123, 2, 0),
    124: (124, 19, 0),
    125: (125, 7, 6, 5, 0),
    126: (126, 21, 0),
    127: (127, 1, 0),
    128: (128, 7, 2, 1, 0),
    129: (129, 5, 0),
    130: (130, 3, 0),
    131: (131, 8, 3, 2, 0),
    132: (132, 17, 0),
    133: (133, 9, 8, 2, 0),
    134: (134, 57, 0),
    135: (135, 11, 0),
    136: (136, 5, 3, 2, 0),
    137: (137, 21, 0),
    138: (138, 8, 7, 1, 0),
    139: (139, 8, 5, 3, 0),
    140: (140, 15, 0),
    141: (141, 10, 4, 1, 0),
    142: (142, 21, 0),
    143: (143, 5, 3, 2, 0),
    144: (144, 7, 4, 2, 0),
    145: (145, 52, 0),
    146: (146, 71, 0),
    147: (147, 14, 0),
    148: (148, 27, 0),
    149: (149, 10, 9, 7, 0),
    150: (150, 53, 0),
    151: (151, 3, 0),
    152: (152, 6, 3, 2, 0),
    153: (153, 1, 0),
    154: (154, 15, 0),
    155: (155, 62, 0),
    156: (156, 9, 0),
    157: (157, 6, 5, 2, 0),
    158: (158, 8, 6, 5, 0),
    159: (159, 31, 0),
    160: (160, 5, 3, 2, 0),
    161: (161, 18, 0),
    162: (162, 27, 0),
    163: (163, 7, 6, 3, 0),
    164: (164, 10, 8, 7, 0),
    165: (165, 9, 8, 3, 0),
    166: (166, 37, 0),
    167: (167, 6, 0),
    168: (168, 15, 3, 2, 0),
    169: (169, 34, 0),
    170: (170, 11, 0),
    171: (171, 6, 5, 2, 0),
    172: (172, 1, 0),
    173: (173, 8, 5, 2, 0),
    174: (174, 13, 0),
    175: (175, 6, 0),
    176: (176, 11, 3, 2, 0),
    177: (177, 8, 0),
    178: (178, 31, 0),
    179: (179, 4, 2, 1, 0),
    180: (180, 3, 0),
    181: (181, 7, 6, 1, 0),
    182: (182, 81, 0),
    183: (183, 56, 0),
    184: (184, 9, 8, 7, 0),
    185: (185, 24, 0),
    186: (186, 11, 0),
    187: (187, 7, 6, 5, 0),
    188: (188, 6, 5, 2, 0),
    189: (189, 6, 5, 2, 0),
    190: (190, 8, 7, 6, 0),
    191: (191, 9, 0),
    192: (192, 7, 2, 1, 0),
    193: (193, 15, 0),
    194: (194, 87, 0),
    195: (195, 8, 3, 2, 0),
    196: (196, 3, 0),
    197: (197, 9, 4, 2, 0),
    198: (198, 9, 0),
    199: (199, 34, 0),
    200: (200, 5, 3, 2, 0),
    201: (201, 14, 0),
    202: (202, 55, 0),
    203: (203, 8, 7, 1, 0),
    204: (204, 27, 0),
    205: (205, 9, 5, 2, 0),
    206: (206, 10, 9, 5, 0),
    207: (207, 43, 0),
    208: (208, 9, 3, 1, 0),
    209: (209, 6, 0),
    210: (210, 7, 0),
    211: (211, 11, 10, 8, 0),
    212: (212, 105, 0),
    213: (213, 6, 5, 2, 0),
    214: (214, 73, 0),
    215: (215, 23, 0),
    216: (216, 7, 3, 1, 0),
    217: (217, 45, 0),
    218: (218, 11, 0),
    219: (219, 8, 4, 1, 0),
    220: (220, 7, 0),
    221: (221, 8, 6, 2, 0),
    222: (222, 5, 4, 2, 0),
    223: (223, 33, 0),
    224: (224, 9, 8, 3, 0),
    225: (225, 32, 0),
    226: (226, 10, 7, 3, 0),
    227: (227, 10, 9, 4, 0),
    228: (228, 113, 0),
    229: (229, 10, 4, 1, 0),
    230: (230, 8, 7, 6, 0),
    231: (231, 26, 0),
    232: (232, 9, 4, 2, 0),
    233: (233, 74, 0),
    234: (234, 31, 0),
    235: (235, 9, 6, 1, 0),
    236: (236, 5, 0),
    237: (237, 7, 4, 1, 0),
    238: (238, 73, 0),
    239: (239, 36, 0),
    240: (240, 8, 5, 3, 0),
    241: (241, 70, 0),
    242: (242, 95, 0),
    243: (243, 8, 5, 1, 0),
    244: (244, 111, 0),
    245: (245, 6, 4, 1, 0),
    246: (246, 11, 2, 1, 0),
    247: (247, 82, 0),
    248: (248, 15, 14, 10, 0),
    249: (249, 35, 0),
    250: (250, 103, 0),
    251: (251, 7, 4, 2, 0),
    252: (252, 15, 0),
    253: (253, 46, 0),
    254: (254, 7, 2, 1, 0),
    255: (255, 52, 0),
    256: (256, 10, 5, 2, 0),
}
