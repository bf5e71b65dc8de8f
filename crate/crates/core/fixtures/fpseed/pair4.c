/* Constructed scan pair 4: sentinel walk vs bounded walk. */

int32 seek_stops(int32 *stops)
{
    int32 j;
    int32 c;
    for (j = 0; stops[j] >= 0; j++) {
        c = stops[j];
        j = j + 1;
        j = j + 2;
        j = j + 3;
        j = j + 1;
        j = j + 2;
        j = j + 3;
        j = j + 1;
        j = j + 2;
        j = j + 3;
    }
    return c;
}

void poll_slots(int32 *slots, int32 depth)
{
    int32 i;
    int32 v;
    for (i = 0; i < depth; i++) {
        v = slots[i];
        i = i + 1;
        i = i + 2;
        i = i + 3;
        i = i + 1;
        i = i + 2;
        i = i + 3;
        i = i + 1;
        i = i + 2;
        i = i + 3;
    }
}
