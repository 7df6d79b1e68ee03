import numpy as np
import pytest

from partworth.schema import AttributeSchema


def make_schema(level_counts, prefix="attr"):
    """Schema with numeric level names ("0", "1", ...) per attribute."""
    return AttributeSchema(
        (f"{prefix}{i}", [str(j) for j in range(k)]) for i, k in enumerate(level_counts)
    )


def auc_bruteforce(scores, targets):
    """O(n^2) pairwise AUC oracle: wins + half-credit ties over all pos/neg pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets)
    pos = scores[targets == 1]
    neg = scores[targets == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


MM_HEADER = (
    "ResponseID,UserID,PedPed,Intervention,Saved,CrossingSignal,LeftHand,"
    "Man,Woman,Pregnant,Stroller,OldMan,OldWoman,Boy,Girl,Homeless,LargeWoman,"
    "LargeMan,Criminal,MaleExecutive,FemaleExecutive,FemaleAthlete,MaleAthlete,"
    "FemaleDoctor,MaleDoctor,Dog,Cat"
)


def mm_row(response_id, user_id, pedped, intervention, saved, crossing=0, left=0,
           counts=None):
    counts = counts if counts is not None else [0] * 20
    assert len(counts) == 20
    fields = [response_id, user_id, str(pedped), str(intervention), str(saved),
              str(crossing), str(left)] + [str(c) for c in counts]
    return ",".join(fields)


def write_mm_fixture(path, rows):
    path.write_text(MM_HEADER + "\n" + "\n".join(rows) + "\n")


CAR_HEADER_EXP1 = (
    "UserID,Education,Age,Gender,Region,"
    "BodyTypeA,TransmissionA,EngineCapacityA,FuelA,"
    "BodyTypeB,TransmissionB,EngineCapacityB,FuelB,Choice"
)


def car_row(user="u1", edu="college", age="25", gender="f", region="west",
            car_a=("sedan", "manual", "1.6", "20"), car_b=("suv", "auto", "2.4", "30"),
            choice="1"):
    return ",".join([user, edu, age, gender, region, *car_a, *car_b, choice])


def write_car_fixture(path, rows):
    path.write_text(CAR_HEADER_EXP1 + "\n" + "\n".join(rows) + "\n")


@pytest.fixture
def rng():
    return np.random.default_rng(42)
