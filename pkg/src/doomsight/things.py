"""DoomEd thing types: category names and idle sprite prefixes.

The category table is the taxonomy used for spawn records and Coco categories.
It can be replaced by a text file of ``<doomed_type> <category_name>`` lines.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, NamedTuple, Optional

UNKNOWN_CATEGORY = "unknown"


class ThingType(NamedTuple):
    category: str
    sprite: Optional[str]  # None: never drawn (starts, teleport targets)


THING_TYPES: dict[int, ThingType] = {
    # starts and markers
    1: ThingType("player1_start", None),
    2: ThingType("player2_start", None),
    3: ThingType("player3_start", None),
    4: ThingType("player4_start", None),
    11: ThingType("deathmatch_start", None),
    14: ThingType("teleport_destination", None),
    87: ThingType("spawn_spot", None),
    89: ThingType("spawn_shooter", None),
    # monsters
    3004: ThingType("zombieman", "POSS"),
    9: ThingType("shotgun_guy", "SPOS"),
    65: ThingType("heavy_weapon_dude", "CPOS"),
    3001: ThingType("imp", "TROO"),
    3002: ThingType("demon", "SARG"),
    58: ThingType("spectre", "SARG"),
    3006: ThingType("lost_soul", "SKUL"),
    3005: ThingType("cacodemon", "HEAD"),
    69: ThingType("hell_knight", "BOS2"),
    3003: ThingType("baron_of_hell", "BOSS"),
    68: ThingType("arachnotron", "BSPI"),
    71: ThingType("pain_elemental", "PAIN"),
    66: ThingType("revenant", "SKEL"),
    67: ThingType("mancubus", "FATT"),
    64: ThingType("arch_vile", "VILE"),
    7: ThingType("spider_mastermind", "SPID"),
    16: ThingType("cyberdemon", "CYBR"),
    84: ThingType("wolfenstein_ss", "SSWV"),
    72: ThingType("commander_keen", "KEEN"),
    88: ThingType("boss_brain", "BBRN"),
    # weapons
    2005: ThingType("chainsaw", "CSAW"),
    2001: ThingType("shotgun", "SHOT"),
    82: ThingType("super_shotgun", "SGN2"),
    2002: ThingType("chaingun", "MGUN"),
    2003: ThingType("rocket_launcher", "LAUN"),
    2004: ThingType("plasma_gun", "PLAS"),
    2006: ThingType("bfg9000", "BFUG"),
    # ammo
    2007: ThingType("clip", "CLIP"),
    2048: ThingType("box_of_bullets", "AMMO"),
    2008: ThingType("shells", "SHEL"),
    2049: ThingType("box_of_shells", "SBOX"),
    2010: ThingType("rocket", "ROCK"),
    2046: ThingType("box_of_rockets", "BROK"),
    2047: ThingType("cell_charge", "CELL"),
    17: ThingType("cell_pack", "CELP"),
    8: ThingType("backpack", "BPAK"),
    # health, armor, powerups
    2011: ThingType("stimpack", "STIM"),
    2012: ThingType("medikit", "MEDI"),
    2014: ThingType("health_bonus", "BON1"),
    2015: ThingType("armor_bonus", "BON2"),
    2018: ThingType("green_armor", "ARM1"),
    2019: ThingType("blue_armor", "ARM2"),
    2013: ThingType("soulsphere", "SOUL"),
    83: ThingType("megasphere", "MEGA"),
    2022: ThingType("invulnerability", "PINV"),
    2023: ThingType("berserk", "PSTR"),
    2024: ThingType("invisibility", "PINS"),
    2025: ThingType("radiation_suit", "SUIT"),
    2026: ThingType("computer_map", "PMAP"),
    2045: ThingType("light_amplification", "PVIS"),
    # keys
    5: ThingType("blue_keycard", "BKEY"),
    6: ThingType("yellow_keycard", "YKEY"),
    13: ThingType("red_keycard", "RKEY"),
    40: ThingType("blue_skull_key", "BSKU"),
    39: ThingType("yellow_skull_key", "YSKU"),
    38: ThingType("red_skull_key", "RSKU"),
    # obstacles and decorations
    2035: ThingType("barrel", "BAR1"),
    2028: ThingType("floor_lamp", "COLU"),
    85: ThingType("tall_techno_lamp", "TLMP"),
    86: ThingType("short_techno_lamp", "TLP2"),
    34: ThingType("candle", "CAND"),
    35: ThingType("candelabra", "CBRA"),
    44: ThingType("tall_blue_firestick", "TBLU"),
    45: ThingType("tall_green_firestick", "TGRN"),
    46: ThingType("tall_red_firestick", "TRED"),
    55: ThingType("short_blue_firestick", "SMBT"),
    56: ThingType("short_green_firestick", "SMGT"),
    57: ThingType("short_red_firestick", "SMRT"),
    70: ThingType("burning_barrel", "FCAN"),
    30: ThingType("tall_green_pillar", "COL1"),
    31: ThingType("short_green_pillar", "COL2"),
    32: ThingType("tall_red_pillar", "COL3"),
    33: ThingType("short_red_pillar", "COL4"),
    36: ThingType("pillar_with_heart", "COL5"),
    37: ThingType("red_pillar_with_skull", "COL6"),
    47: ThingType("brown_stump", "SMIT"),
    43: ThingType("burnt_tree", "TRE1"),
    54: ThingType("large_brown_tree", "TRE2"),
    48: ThingType("tall_techno_column", "ELEC"),
    41: ThingType("evil_eye", "CEYE"),
    42: ThingType("floating_skull", "FSKU"),
    24: ThingType("pool_of_blood_and_flesh", "POL5"),
    25: ThingType("impaled_human", "POL1"),
    26: ThingType("twitching_impaled_human", "POL6"),
    27: ThingType("skull_on_pole", "POL4"),
    28: ThingType("five_skulls_shish_kebab", "POL2"),
    29: ThingType("pile_of_skulls_and_candles", "POL3"),
    10: ThingType("bloody_mess", "PLAY"),
    12: ThingType("bloody_mess_2", "PLAY"),
    15: ThingType("dead_player", "PLAY"),
    18: ThingType("dead_zombieman", "POSS"),
    19: ThingType("dead_shotgun_guy", "SPOS"),
    20: ThingType("dead_imp", "TROO"),
    21: ThingType("dead_demon", "SARG"),
    22: ThingType("dead_cacodemon", "HEAD"),
    23: ThingType("dead_lost_soul", "SKUL"),
    49: ThingType("hanging_victim_twitching", "GOR1"),
    50: ThingType("hanging_victim_arms_out", "GOR2"),
    51: ThingType("hanging_victim_one_legged", "GOR3"),
    52: ThingType("hanging_pair_of_legs", "GOR4"),
    53: ThingType("hanging_leg", "GOR5"),
    73: ThingType("hanging_victim_guts_removed", "HDB1"),
    74: ThingType("hanging_victim_guts_and_brain_removed", "HDB2"),
    75: ThingType("hanging_torso_looking_down", "HDB3"),
    76: ThingType("hanging_torso_open_skull", "HDB4"),
    77: ThingType("hanging_torso_looking_up", "HDB5"),
    78: ThingType("hanging_torso_brain_removed", "HDB6"),
    79: ThingType("pool_of_blood", "POB1"),
    80: ThingType("pool_of_blood_2", "POB2"),
    81: ThingType("pool_of_brains", "BRS1"),
}


def default_category_table() -> dict[int, str]:
    """Categories for every drawable thing type."""
    return {t: info.category for t, info in THING_TYPES.items() if info.sprite is not None}


def sprite_prefix(doomed_type: int) -> Optional[str]:
    info = THING_TYPES.get(doomed_type)
    return None if info is None else info.sprite


def category_of(doomed_type: int, table: Mapping[int, str]) -> str:
    return table.get(doomed_type, UNKNOWN_CATEGORY)


def parse_category_table(text: str) -> dict[int, str]:
    table: dict[int, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[0].lstrip("-").isdigit():
            raise ValueError(f"category table line {lineno}: expected '<doomed_type> <name>'")
        table[int(parts[0])] = parts[1]
    return table


def read_category_table(path) -> dict[int, str]:
    return parse_category_table(Path(path).read_text(encoding="utf-8"))


def format_category_table(table: Mapping[int, str]) -> str:
    return "".join(f"{t} {name}\n" for t, name in sorted(table.items()))
