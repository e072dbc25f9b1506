// (n, x, ln(e^-x I_n(x)), ln(e^x K_n(x))), mpmath at 40 digits.
pub const CYLINDRICAL: &[(usize, f64, f64, f64)] = &[
    (0, 0.001, -0.000999750000015625019, 1.95028855019219871),
    (0, 0.1, -0.0975015607661237619, 0.986684366678742132),
    (0, 1.0, -0.764085641492821351, 0.134935601093211903),
    (0, 10.0, -2.05702791688130445, -0.93743282303833292),
    (0, 100.0, -3.22026731005741628, -2.07803755445829631),
    (0, 10000.0, -5.524096218567699, -4.37939133271842903),
    (1, 0.001, -7.60190233454208494, 6.90875151713114685),
    (1, 0.1, -3.09448253386220489, 2.38786171210716767),
    (1, 1.0, -1.57064798749083128, 0.492348051789247669),
    (1, 10.0, -2.10979616589578771, -0.889730180588070981),
    (1, 100.0, -3.22529254240855154, -2.07306232835992423),
    (1, 10000.0, -5.52414622106792819, -4.37934133521819989),
    (5, 0.001, -42.7930039988257912, 40.4904188849984127),
    (5, 0.1, -19.8657364562852666, 17.5629430826350244),
    (5, 1.0, -9.21168413329829114, 6.88876878229372839),
    (5, 10.0, -3.34431735414495464, 0.237001950933775093),
    (5, 100.0, -3.34587236741991855, -1.95368115466478686),
    (5, 10000.0, -5.52534628104842144, -4.37814139523769314),
    (10, 0.001, -91.114437145769066, 88.11870486716457),
    (10, 0.1, -45.1615080380403056, 42.1657252621059316),
    (10, 1.0, -23.0131785779730418, 20.0124222996263129),
    (10, 10.0, -6.91389214889303113, 3.5711184570374041),
    (10, 100.0, -3.72236663434606182, -1.58091424896991745),
    (10, 10000.0, -5.52909646817799513, -4.37439158310789165),
    (50, 0.001, -528.523889923975188, 523.918719737787017),
    (50, 0.1, -298.364331609887841, 293.75915942310344),
    (50, 1.0, -184.130224250007683, 179.524854024081021),
    (50, 10.0, -77.5179577376942684, 72.8931701526311503),
    (50, 100.0, -15.5337565648212175, 10.123867421489555),
    (50, 10000.0, -5.649102208752032, -4.25439784237806737),
    (100, 0.001, -1123.83062150729648, 1118.53230414069844),
    (100, 0.1, -663.41257815849034, 658.114260291892548),
    (100, 1.0, -434.051618394065886, 428.753251025018808),
    (100, 10.0, -212.548358937420741, 207.245065921321385),
    (100, 100.0, -50.1106679292084426, 44.4657722849707857),
    (100, 10000.0, -6.02411705348452156, -3.8794204953026479),
    (1000, 0.001, -13513.0316380299959, 13505.4307355704534),
    (1000, 0.1, -8907.96044954465179, 8900.35954708010971),
    (1000, 1.0, -6606.27510929789003, 6598.6742063383477),
    (1000, 10.0, -4312.66529134033105, 4305.06433888323881),
    (1000, 100.0, -2097.61077281100145, 2090.00489518119196),
];

// (l, x, ln(e^-x i_l(x)), ln(e^x k_l(x))) with k_0(x) = e^-x / x.
pub const SPHERICAL: &[(usize, f64, f64, f64)] = &[
    (0, 0.001, -0.000999833333338888909, 6.90775527898213703),
    (0, 0.7, -0.619627190544140113, 0.356674943938732442),
    (0, 1.0, -0.838560638428804366, 0.0),
    (0, 10.0, -2.99573227561514462, -2.30258509299404568),
    (0, 100.0, -5.29831736654803668, -4.60517018598809137),
    (1, 0.001, -8.00736746765024815, 13.8165100582973576),
    (1, 0.7, -2.10662533903668787, 1.24397813893963525),
    (1, 1.0, -2.0, 0.693147180559945309),
    (1, 10.0, -3.10109278669262954, -2.20727491318972082),
    (1, 100.0, -5.30836770240153812, -4.59521985513492329),
    (3, 0.001, -25.3782261315483792, 30.3400712170307615),
    (3, 0.7, -6.39682995432318988, 4.78648471083653796),
    (3, 1.0, -5.5986822259844926, 3.61091791264422444),
    (3, 10.0, -3.62122079884024088, -1.73443440260878559),
    (3, 100.0, -5.35861422958324963, -4.54547305297998509),
    (10, 0.001, -92.4228072878841795, 96.2860401245662346),
    (10, 0.7, -27.6003563192601858, 24.9102714870594809),
    (10, 1.0, -24.3225342524869607, 21.2734568399395036),
    (10, 10.0, -8.30171975134331658, 2.63138137494112693),
    (10, 100.0, -5.85057733053086018, -4.05838099223239247),
    (50, 0.001, -530.608134036886935, 532.900768798831676),
    (50, 0.7, -203.750738702676247, 199.492197032327301),
    (50, 1.0, -186.214515948102864, 181.599199333670376),
    (50, 10.0, -79.6068961205588046, 72.6699524354778076),
    (50, 100.0, -17.8532840052579331, 7.83621857815044651),
    (200, 0.001, -2386.18529190134013, 2387.09908575300326),
    (200, 0.7, -1076.66761695436583, 1071.03032437639407),
    (200, 1.0, -1005.63199541516511, 999.638021549970261),
    (200, 10.0, -553.992186005563511, 545.69439722562344),
    (200, 100.0, -171.544537215451578, 160.834330716010727),
];
