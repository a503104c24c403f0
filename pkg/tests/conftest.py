"""Shared fixtures: published sample noise fields and seed statistics."""

import pytest

# Short high-variety sample field (29 distinct printable chars).
FIELD_SHORT = "k7@!xQ2#mZ$pL9&wR*fN3%gH8^jT5"

# Medium sample field (86 chars, mixed classes).
FIELD_MEDIUM = (
    "v4$nK!9@hW#2xP&7mL*fQ5^jR%8cT3~gN6+bY1:dZ0-eS4|wM2\\aH9/uF7{rV5}"
    "iX3<oG1>pJ8,qC6.tD2;sA4"
)

# Long sample field (349 chars).
FIELD_LONG = (
    "z9@mK#4wF!7xL$2nQ&5rP*8hV^3jG%1bN~6tM+0cY:dS-9eW|8fT\\7gR/4aH{6uJ}"
    "2iZ<3oX>1pD,5qC.8sA;7vBk2@E!9xL#4wM$7nP&3rQ*5hV^8jF%1bG~6tN+0cY:dS"
    "-4eW|2fT\\9gR/7aH{3uJ}5iZ<8oX>6pD,1qC.4sA;2vBn5@K!3wF#9xL$7mQ&2rP*"
    "4hV^6jG%8bN~1tM+5cY:dS-0eW|3fT\\7gR/2aH{9uJ}4iZ<6oX>1pD,8qC.5sA;3v"
    "Br8@E!2wM#5xL$9nP&4rQ*7hV^3jF%6bG~0tN+8cY:dS-1eW|5fT\\3gR/9aH{7uJ}"
    "2iZ<4oX>0pD,6qC.8sA;1vB"
)

# Reference seed-statistics vector for the medium-field persona profile.
SEED_VECTOR_M1 = (4.51, 0.38, 0.691, 0.142, 7, 3, 0.83, 19.4,
                  0.317, 0.231, 0.240, 0.212)


@pytest.fixture
def field_short():
    return FIELD_SHORT


@pytest.fixture
def field_medium():
    return FIELD_MEDIUM


@pytest.fixture
def field_long():
    return FIELD_LONG
